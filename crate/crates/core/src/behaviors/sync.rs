/// First byte of the message an oscillator broadcasts when it fires.
pub const FIRE_BYTE: u8 = 0xf1;

/// One tick of a pulse-coupled oscillator with multiplicative excitatory
/// coupling.
///
/// The phase grows linearly at `dt_ms / period_ms`. A heard fire pulls it
/// forward to `min(1, (1 + epsilon) * phase)`. Reaching 1 fires and resets
/// the phase to 0. Returns `(new_phase, fired)`; the phase stays in `[0, 1)`.
pub fn sync_step(phase: f64, dt_ms: u32, period_ms: u32, epsilon: f64, heard_fire: bool) -> (f64, bool) {
    let mut p = phase + dt_ms as f64 / period_ms as f64;
    if heard_fire {
        p = (p * (1.0 + epsilon)).min(1.0);
    }
    if p >= 1.0 {
        (0.0, true)
    } else {
        (p, false)
    }
}
