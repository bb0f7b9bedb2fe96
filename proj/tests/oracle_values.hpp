// Generated by tests/oracles/oracle.py; do not edit.
#pragma once

namespace oracle {

inline constexpr double kLoss1[4] = {0.33624513231524394, 0.9470879904246354, 0.3758155528065537, 10.519185721683396};
inline constexpr double kMetrics1[5] = {0.8202495322340279, 0.4281193621528648, 0.3038409586995221, 0.622700004971567, 0.6513768639463223};
inline constexpr double kBands1[8][2] = {{0.677068806820999, 0.0005713688410554826}, {-0.0023140990906484462, 0.27664240153189956}, {0.0019046766103117151, 0.27982206750171046}, {0.0022782113445639113, 0.3152235340978124}, {0.652396210938072, -0.001464199499661795}, {0.0008139216987571918, 0.4458227286325496}, {-0.0018108689145306597, 0.28683556205219296}, {0.0011758196552749294, 0.37131441416515665}};

inline constexpr double kLoss2[4] = {0.3592113720833348, 1.019935632805789, 0.416223433395729, 11.334002505620287};
inline constexpr double kMetrics2[5] = {0.8108467128974003, 0.35670642031114175, 0.28265241971552474, 0.5871739936129463, 0.6603335899355574};
inline constexpr double kBands2[8][2] = {{0.5785473277168665, 0.00114403840154487}, {0.0026844999737061577, 0.29360573411352975}, {0.0033600058916076615, 0.34778318414212495}, {-0.0024798650079882463, 0.435324035496733}, {0.6342389896195426, -0.0014757669613394478}, {-0.000650009431927587, 0.356198641527193}, {0.0011692070423331615, 0.2311269978864541}, {0.0014441923183012805, 0.31144561776882895}};

inline constexpr double kSsimLossFeqA = 0.4993376094594539;  // loss_ssim(a, a, b)
inline constexpr double kQwNoiseVsStructured = 0.045852065874332035;
inline constexpr double kQabfSelfStructured = 0.9999712167382604;
inline constexpr double kQabfSelfNoise = 0.9999712167382624;
inline constexpr double kTextureStep4 = 2.0;
inline constexpr double kFmiNoise32 = 0.6483185449815407;
inline constexpr double kFmiNoise128 = 0.1811066010706464;

}  // namespace oracle
