use crate::model::MotorCommand;

/// Drive during the first `duty` fraction of the beat, rest for the remainder.
pub fn march_step(phase: f64, duty: f64) -> MotorCommand {
    if phase < duty {
        MotorCommand::Straight
    } else {
        MotorCommand::Stop
    }
}
