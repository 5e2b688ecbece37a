use crate::model::MotorCommand;
use crate::sim::Pose;

/// Bang-bang edge following around an anchor.
///
/// Too close (below `desired - band/2`) turns left, away from an anchor
/// kept on the right; too far (above `desired + band/2`) turns right,
/// toward it; inside the band drives straight. Only the distance estimate
/// matters; the pose is accepted for controllers that want it.
pub fn orbit_step(_self_pose: &Pose, estimated_distance_mm: f64, desired_mm: f64, band_mm: f64) -> MotorCommand {
    let half = band_mm / 2.0;
    if estimated_distance_mm < desired_mm - half {
        MotorCommand::TurnLeft
    } else if estimated_distance_mm > desired_mm + half {
        MotorCommand::TurnRight
    } else {
        MotorCommand::Straight
    }
}
