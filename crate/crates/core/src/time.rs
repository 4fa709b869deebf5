//! Clock constants and helpers for moving between minute, slot and hour
//! resolution.

pub const MINUTES_PER_DAY: usize = 1440;
pub const HOURS_PER_DAY: usize = 24;
pub const SLOTS_PER_DAY: usize = 96;
pub const MINUTES_PER_HOUR: usize = 60;
pub const MINUTES_PER_SLOT: usize = 15;
pub const SLOTS_PER_HOUR: usize = 4;

/// Energy (MWh) of consecutive blocks of a minute-resolution power
/// series (MW).
pub fn block_energy(power_mw: &[f64], block_minutes: usize) -> Vec<f64> {
    power_mw
        .chunks(block_minutes)
        .map(|chunk| chunk.iter().sum::<f64>() / MINUTES_PER_HOUR as f64)
        .collect()
}

/// Hourly energy (MWh) of a 1440-minute power series.
pub fn hourly_energy(power_mw: &[f64]) -> [f64; HOURS_PER_DAY] {
    debug_assert_eq!(power_mw.len(), MINUTES_PER_DAY);
    let mut out = [0.0; HOURS_PER_DAY];
    for (h, chunk) in power_mw.chunks(MINUTES_PER_HOUR).enumerate() {
        out[h] = chunk.iter().sum::<f64>() / MINUTES_PER_HOUR as f64;
    }
    out
}

/// `out[i] = series[(i + steps) mod len]`: the series advanced by `steps`.
pub fn advance<T: Copy>(series: &[T], steps: usize) -> Vec<T> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let k = steps % n;
    series[k..]
        .iter()
        .chain(series[..k].iter())
        .copied()
        .collect()
}

/// Inverse of [`advance`].
pub fn delay<T: Copy>(series: &[T], steps: usize) -> Vec<T> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    advance(series, n - steps % n)
}

/// Advance a 24-hour profile by `hours`.
pub fn advance_hours(profile: &[f64; HOURS_PER_DAY], hours: usize) -> [f64; HOURS_PER_DAY] {
    let mut out = [0.0; HOURS_PER_DAY];
    for (h, slot) in out.iter_mut().enumerate() {
        *slot = profile[(h + hours) % HOURS_PER_DAY];
    }
    out
}
