use crate::config::SystemConfig;
use crate::math;

/// Channel power gain `|h|² = d^(−ρ)·X` for a unit-mean fade draw `X`.
pub fn channel_gain(cfg: &SystemConfig, distance: f64, fade_gain: f64) -> f64 {
    math::powf(distance, -cfg.pathloss_exponent) * fade_gain
}

/// Shannon rate `W·log2(1 + p_off·|h|²/σ²)` in bits/s.
pub fn achievable_rate(cfg: &SystemConfig, distance: f64, fade_gain: f64) -> f64 {
    debug_assert!(distance > 0.0 && fade_gain >= 0.0);
    let snr = cfg.offload_power * channel_gain(cfg, distance, fade_gain) / cfg.noise_power;
    cfg.bandwidth * math::log2(1.0 + snr)
}
