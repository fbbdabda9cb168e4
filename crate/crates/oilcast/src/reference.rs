//! Published results of the original WTI study (daily closes, Sep 1996
//! onwards, 90/10 split), shown beside reproduced numbers in reports.
//!
//! These are context, not targets: training is stochastic and the original
//! data vintage is not available.

/// Hit rates in percent, RMSE on the relative-change scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRef {
    pub lag: usize,
    pub in_hit: f64,
    pub out_hit: f64,
    pub in_rmse: f64,
    pub out_rmse: f64,
}

const fn r(lag: usize, in_hit: f64, out_hit: f64, in_rmse: f64, out_rmse: f64) -> SweepRef {
    SweepRef { lag, in_hit, out_hit, in_rmse, out_rmse }
}

/// Relative change without smoothing. Lags 16 and above were marked unstable.
pub const UNSMOOTHED_SWEEP: &[SweepRef] = &[
    r(1, 65.89, 64.44, 0.0313, 0.0637),
    r(2, 67.79, 71.11, 0.0292, 0.0209),
    r(3, 69.97, 69.77, 0.0276, 0.0204),
    r(4, 70.09, 70.22, 0.0273, 0.0201),
    r(5, 70.98, 71.55, 0.0266, 0.0199),
    r(6, 71.10, 70.66, 0.0264, 0.0203),
    r(7, 71.30, 70.66, 0.0260, 0.0202),
    r(8, 72.47, 71.55, 0.0256, 0.0203),
    r(9, 72.27, 73.77, 0.0254, 0.0199),
    r(10, 72.80, 72.88, 0.0248, 0.0206),
    r(12, 72.92, 72.88, 0.0244, 0.0206),
    r(14, 73.80, 73.77, 0.0233, 0.0208),
    r(16, 73.89, 72.0, 0.0233, 0.0204),
    r(18, 75.42, 72.44, 0.0229, 0.0202),
    r(20, 74.89, 72.0, 0.0242, 0.0210),
];

/// Three-day moving average, then relative change.
pub const SMOOTHED_SWEEP: &[SweepRef] = &[
    r(1, 72.77, 73.75, 0.0108, 0.0079),
    r(2, 72.88, 74.01, 0.0107, 0.0080),
    r(3, 73.74, 74.54, 0.0104, 0.0077),
    r(4, 75.42, 76.37, 0.0099, 0.0073),
    r(5, 76.02, 76.90, 0.0096, 0.0074),
    r(6, 76.16, 77.16, 0.0095, 0.0072),
    r(7, 77.25, 77.11, 0.0085, 0.0077),
    r(8, 78.01, 75.59, 0.0091, 0.0070),
    r(9, 78.23, 76.77, 0.0088, 0.0070),
    r(10, 77.78, 78.08, 0.0089, 0.0069),
    r(11, 78.03, 76.37, 0.0086, 0.0071),
    r(12, 77.97, 77.95, 0.0087, 0.0070),
    r(13, 79.45, 79.79, 0.0083, 0.0068),
    r(14, 79.39, 77.42, 0.0083, 0.0072),
    r(15, 79.75, 79.11, 0.0078, 0.0073),
    r(16, 79.77, 79.0, 0.0081, 0.0071),
    r(17, 79.45, 78.34, 0.0080, 0.0069),
    r(18, 80.40, 78.87, 0.0076, 0.0133),
    r(19, 80.95, 77.16, 0.0076, 0.0075),
    r(20, 81.38, 77.55, 0.0074, 0.0074),
];

const FUT1: &[SweepRef] = &[
    r(1, 71.72, 73.55, 0.0112, 0.0079),
    r(2, 71.92, 73.80, 0.0109, 0.0081),
    r(3, 71.42, 71.96, 0.0108, 0.0079),
    r(4, 73.65, 75.15, 0.0104, 0.0075),
    r(5, 74.37, 74.91, 0.0094, 0.0085),
    r(6, 74.0, 76.51, 0.0102, 0.0074),
    r(7, 75.23, 77.61, 0.0099, 0.0073),
    r(8, 74.99, 75.26, 0.0090, 0.0081),
    r(9, 75.40, 75.52, 0.0096, 0.0085),
    r(10, 75.64, 77.49, 0.0095, 0.0072),
    r(11, 76.0, 76.51, 0.0095, 0.0073),
    r(12, 75.82, 77.24, 0.0095, 0.0070),
    r(13, 76.35, 76.01, 0.0093, 0.0073),
    r(14, 76.91, 75.89, 0.0092, 0.0074),
    r(15, 76.78, 75.52, 0.0092, 0.0074),
    r(16, 76.84, 78.11, 0.0091, 0.0072),
    r(17, 77.94, 75.52, 0.0088, 0.0076),
    r(18, 78.09, 76.63, 0.0087, 0.0079),
    r(19, 77.66, 77.24, 0.0087, 0.0078),
    r(20, 78.87, 76.14, 0.0086, 0.0078),
];

const FUT2: &[SweepRef] = &[
    r(1, 70.96, 71.46, 0.0115, 0.0083),
    r(2, 70.80, 72.32, 0.0112, 0.0086),
    r(3, 70.93, 74.29, 0.0111, 0.0083),
    r(4, 72.87, 74.54, 0.0107, 0.0080),
    r(5, 73.20, 74.54, 0.0106, 0.0080),
    r(6, 73.13, 74.54, 0.0105, 0.0079),
    r(7, 74.44, 74.29, 0.0103, 0.0077),
    r(8, 75.22, 74.17, 0.0100, 0.0078),
    r(9, 74.84, 72.94, 0.0101, 0.0079),
    r(10, 75.12, 75.52, 0.0098, 0.1078),
    r(11, 75.71, 75.28, 0.0097, 0.0077),
    r(12, 76.21, 76.75, 0.0097, 0.0181),
    r(13, 76.44, 76.63, 0.0094, 0.0078),
    r(14, 76.64, 75.65, 0.0096, 0.0083),
    r(15, 76.74, 75.15, 0.0094, 0.0521),
    r(16, 76.74, 74.78, 0.0091, 0.0086),
    r(17, 75.52, 73.75, 0.0109, 0.0085),
    r(18, 77.64, 74.29, 0.0091, 0.0082),
    r(19, 77.35, 74.42, 0.0089, 0.0085),
    r(20, 77.28, 73.43, 0.0092, 0.0084),
];

const FUT3: &[SweepRef] = &[
    r(1, 70.98, 72.45, 0.0114, 0.0082),
    r(2, 71.51, 73.31, 0.0111, 0.0084),
    r(3, 71.53, 74.05, 0.0110, 0.0081),
    r(4, 73.17, 73.43, 0.0106, 0.0077),
    r(5, 73.24, 73.58, 0.0096, 0.0088),
    r(6, 73.79, 73.80, 0.0104, 0.0077),
    r(7, 75.10, 75.03, 0.0102, 0.0075),
    r(8, 75.43, 72.69, 0.0101, 0.0077),
    r(9, 74.73, 74.29, 0.0099, 0.0076),
    r(10, 75.27, 75.28, 0.0097, 0.0083),
    r(11, 75.87, 76.51, 0.0098, 0.0075),
    r(12, 76.72, 73.80, 0.0094, 0.0079),
    r(13, 76.51, 75.15, 0.0094, 0.0096),
    r(14, 76.96, 75.40, 0.0094, 0.0077),
    r(15, 77.22, 74.05, 0.0094, 0.0079),
    r(16, 77.54, 73.68, 0.0091, 0.0103),
    r(17, 77.96, 74.42, 0.0090, 0.0077),
    r(18, 77.08, 74.17, 0.0089, 0.0080),
    r(19, 77.68, 75.77, 0.0088, 0.0081),
    r(20, 77.67, 72.82, 0.0088, 0.0085),
];

const FUT4: &[SweepRef] = &[
    r(1, 70.11, 72.32, 0.0116, 0.0084),
    r(2, 70.20, 71.71, 0.0113, 0.0087),
    r(3, 70.57, 72.94, 0.0112, 0.0083),
    r(4, 72.42, 74.05, 0.0108, 0.0081),
    r(5, 73.05, 74.29, 0.0107, 0.0082),
    r(6, 72.94, 74.66, 0.0106, 0.0079),
    r(7, 74.42, 75.65, 0.0104, 0.0079),
    r(8, 74.16, 72.94, 0.0103, 0.0078),
    r(9, 74.21, 73.68, 0.0102, 0.0137),
    r(10, 74.47, 74.91, 0.0100, 0.0081),
    r(11, 75.72, 76.26, 0.0099, 0.0432),
    r(12, 74.88, 74.66, 0.0100, 0.0080),
    r(13, 75.42, 74.29, 0.0097, 0.0154),
    r(14, 75.49, 75.65, 0.0098, 0.0079),
    r(15, 75.61, 74.17, 0.0097, 0.0126),
    r(16, 76.07, 76.14, 0.0097, 0.0085),
    r(17, 76.43, 72.69, 0.0095, 0.0082),
    r(18, 76.59, 73.80, 0.0093, 0.0086),
    r(19, 76.90, 74.91, 0.0090, 0.0398),
    r(20, 77.02, 72.82, 0.0092, 0.0083),
];

/// Sweep with a futures contract (`fut1` .. `fut4`) as the only input.
pub fn futures_sweep(contract: &str) -> Option<&'static [SweepRef]> {
    match contract {
        "fut1" => Some(FUT1),
        "fut2" => Some(FUT2),
        "fut3" => Some(FUT3),
        "fut4" => Some(FUT4),
        _ => None,
    }
}

pub fn sweep_row(table: &[SweepRef], lag: usize) -> Option<&SweepRef> {
    table.iter().find(|r| r.lag == lag)
}

/// In/out-of-sample hit rate (percent), RMSE, MSE and MAE of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRef {
    pub hit: [f64; 2],
    pub rmse: [f64; 2],
    pub mse: [f64; 2],
    pub mae: [f64; 2],
}

/// 7 lags of momentum and 7 of force, force as target.
pub const CANDIDATE_BENCHMARK: SummaryRef = SummaryRef {
    hit: [74.93, 76.0],
    rmse: [0.02312, 0.01922],
    mse: [0.00052, 0.00038],
    mae: [0.01724, 0.01502],
};

/// Smoothed 13-lag benchmark with one lag of `fut1` appended.
pub const BENCHMARK_PLUS_FUT1: SummaryRef = SummaryRef {
    hit: [79.18, 80.44],
    rmse: [0.0084, 0.0059],
    mse: [0.0001, 0.0],
    mae: [0.0063, 0.0046],
};

/// Hit rate (percent) at t+1, t+2, t+3: `[in-sample, out-of-sample]`.
pub const MULTISTEP: [[f64; 3]; 2] = [[78.60, 67.45, 54.0], [78.72, 66.66, 50.0]];

/// Multi-step hit rates with one lag of a futures contract added.
pub fn multistep_futures(contract: &str) -> Option<[[f64; 3]; 2]> {
    match contract {
        "fut1" => Some([[78.35, 68.31, 56.0], [77.50, 66.0, 53.0]]),
        "fut2" => Some([[78.81, 67.96, 56.67], [78.69, 66.78, 52.95]]),
        "fut3" => Some([[78.73, 67.72, 55.45], [78.97, 66.30, 48.59]]),
        "fut4" => Some([[78.94, 68.28, 55.35], [78.84, 67.28, 49.82]]),
        _ => None,
    }
}
