use std::io::Write;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::system::{PiecewiseSystem, Region};

/// Writes `t, x1, x2, region, event_flag` rows.
pub fn write_trajectory_csv<W: Write>(sys: &PiecewiseSystem, traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["t", "x1", "x2", "region", "event_flag"]).map_err(io)?;
    for &(t, x) in &traj.samples {
        let is_event = traj.events.iter().any(|e| e.time == t);
        let region = if is_event {
            "zero"
        } else {
            match sys.region(x) {
                Region::Minus => "minus",
                Region::Zero => "zero",
                Region::Plus => "plus",
            }
        };
        w.write_record([
            format!("{t:.17e}"),
            format!("{:.17e}", x[0]),
            format!("{:.17e}", x[1]),
            region.to_string(),
            u8::from(is_event).to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{advance, IntegratorConfig};
    use crate::system::{duffing, DuffingParams};

    #[test]
    fn csv_has_documented_columns() {
        let sys = duffing(&DuffingParams::default());
        let traj = advance(&sys, 0.0, -1.0, [0.9, 0.7], 1.0, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&sys, &traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x1,x2,region,event_flag\n"));
        assert_eq!(text.lines().count(), traj.samples.len() + 1);
    }
}
