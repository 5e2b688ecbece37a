//! Built-in scene controllers: pulse-coupled LED synchronization, orbiting
//! around an anchor robot, a synchronized rhythmic march, and static text
//! pixels.
//!
//! The step functions here are pure; the simulator owns per-robot state and
//! calls them once per tick.

mod march;
mod orbit;
mod sync;
pub mod text;

pub use march::march_step;
pub use orbit::orbit_step;
pub use sync::{sync_step, FIRE_BYTE};
pub use text::{layout_text, Bitmap, Font, TextError};

use serde::{Deserialize, Serialize};

use crate::model::ColorState;

/// Shortest oscillator period the controllers accept.
pub const MIN_PERIOD_MS: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    Sync { period_ms: u32, epsilon: f64, flash_color: ColorState },
    Orbit { anchor_id: u32, desired_mm: f64, band_mm: f64 },
    March { period_ms: u32, epsilon: f64, duty: f64 },
    TextPixel { color: ColorState },
}

impl ControllerSpec {
    pub fn check(&self) -> Result<(), String> {
        let period_ok = |p: u32| {
            if p < MIN_PERIOD_MS {
                Err(format!("period_ms must be at least {MIN_PERIOD_MS}, got {p}"))
            } else {
                Ok(())
            }
        };
        let coupling_ok = |e: f64| {
            if e > 0.0 && e < 1.0 {
                Ok(())
            } else {
                Err(format!("epsilon must lie in (0, 1), got {e}"))
            }
        };
        match *self {
            ControllerSpec::Sync { period_ms, epsilon, .. } => {
                period_ok(period_ms)?;
                coupling_ok(epsilon)
            }
            ControllerSpec::March { period_ms, epsilon, duty } => {
                period_ok(period_ms)?;
                coupling_ok(epsilon)?;
                if duty > 0.0 && duty < 1.0 {
                    Ok(())
                } else {
                    Err(format!("duty must lie in (0, 1), got {duty}"))
                }
            }
            ControllerSpec::Orbit { desired_mm, band_mm, .. } => {
                if desired_mm.is_nan() || desired_mm <= 0.0 {
                    return Err(format!("desired_mm must be positive, got {desired_mm}"));
                }
                if band_mm.is_nan() || band_mm <= 0.0 {
                    return Err(format!("band_mm must be positive, got {band_mm}"));
                }
                Ok(())
            }
            ControllerSpec::TextPixel { .. } => Ok(()),
        }
    }
}
