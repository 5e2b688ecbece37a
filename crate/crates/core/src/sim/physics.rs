use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::model::MotorCommand;

/// Robot and radio constants. Every field has a default, so a scene file
/// only lists the ones it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// mm/s
    pub v_straight: f64,
    /// rad/s
    pub omega_turn: f64,
    /// mm
    pub comm_radius: f64,
    pub tx_period_ms: u32,
    pub msg_loss_prob: f64,
    /// Relative standard deviation of the distance covered by a straight tick.
    pub motion_noise_std: f64,
    /// mm
    pub body_diameter: f64,
    /// mm; standard deviation of the ranging error on each reception.
    pub distance_noise_std: f64,
    /// Distance from the center to the point a turn rotates about, on the
    /// side being turned toward. 0 spins in place.
    pub turn_pivot_mm: f64,
    /// Count scene start as a reception, so silence cannot fire before the
    /// first window has passed.
    pub silence_from_start: bool,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            v_straight: 10.0,
            omega_turn: PI / 4.0,
            comm_radius: 100.0,
            tx_period_ms: 500,
            msg_loss_prob: 0.0,
            motion_noise_std: 0.0,
            body_diameter: 33.0,
            distance_noise_std: 0.0,
            turn_pivot_mm: 16.5,
            silence_from_start: true,
        }
    }
}

impl PhysicsParams {
    pub fn check(&self) -> Result<(), String> {
        let fields = [
            ("v_straight", self.v_straight),
            ("omega_turn", self.omega_turn),
            ("comm_radius", self.comm_radius),
            ("motion_noise_std", self.motion_noise_std),
            ("body_diameter", self.body_diameter),
            ("distance_noise_std", self.distance_noise_std),
            ("turn_pivot_mm", self.turn_pivot_mm),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if self.comm_radius <= 0.0 {
            return Err("comm_radius must be positive".into());
        }
        if self.tx_period_ms == 0 {
            return Err("tx_period_ms must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.msg_loss_prob) {
            return Err(format!("msg_loss_prob must lie in [0, 1], got {}", self.msg_loss_prob));
        }
        Ok(())
    }
}

/// Position in mm, heading in radians counter-clockwise from +x, y up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangle centered on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.width / 2.0 && y.abs() <= self.height / 2.0
    }

    pub fn clamp(&self, pose: Pose) -> Pose {
        Pose {
            x: pose.x.clamp(-self.width / 2.0, self.width / 2.0),
            y: pose.y.clamp(-self.height / 2.0, self.height / 2.0),
            heading: pose.heading,
        }
    }
}

/// Heading folded into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Pose after holding `motor` for `dt_ms`, without walls. `stretch` scales
/// the straight-line distance (1 + η for a noisy tick).
pub fn advance(pose: Pose, motor: MotorCommand, dt_ms: f64, params: &PhysicsParams, stretch: f64) -> Pose {
    let dt = dt_ms / 1000.0;
    match motor {
        MotorCommand::Stop => pose,
        MotorCommand::Straight => {
            let d = params.v_straight * dt * stretch;
            Pose { x: pose.x + d * pose.heading.cos(), y: pose.y + d * pose.heading.sin(), heading: pose.heading }
        }
        MotorCommand::TurnLeft | MotorCommand::TurnRight => {
            let side = if motor == MotorCommand::TurnLeft { 1.0 } else { -1.0 };
            let r = params.turn_pivot_mm;
            let (s, c) = pose.heading.sin_cos();
            let (px, py) = (pose.x - side * r * s, pose.y + side * r * c);
            let dh = side * params.omega_turn * dt;
            let (ds, dc) = dh.sin_cos();
            let (ox, oy) = (pose.x - px, pose.y - py);
            Pose { x: px + ox * dc - oy * ds, y: py + ox * ds + oy * dc, heading: wrap_angle(pose.heading + dh) }
        }
    }
}
