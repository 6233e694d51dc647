//! Line-oriented mission scripts.
//!
//! One directive per line; `#` starts a comment. Angles are degrees, rates
//! degrees per second, altitudes metres, thrust newtons, times seconds.
//!
//! ```text
//! duration 30
//! dt 0.001
//! setpoint <t> <roll> <pitch> <yaw_rate> [collective]
//! sigma <t> 0|1
//! mu <t> <actuator 0..4>
//! altitude <t> <z> [rate]
//! ```
//!
//! Omitting `collective` hands the collective to the altitude hold. An
//! `altitude 0 <z>` line with no rate sets the start altitude.

use std::fmt::Write as _;

use heliquad_core::harness::{MissionEvent, MissionScript};

use crate::{parse_f64, FormatError};

const DEFAULT_DT: f64 = 1e-3;

pub fn parse_mission(text: &str) -> Result<MissionScript, FormatError> {
    let mut events = Vec::new();
    let (mut duration, mut dt) = (None, DEFAULT_DT);
    for (i, raw) in text.lines().enumerate() {
        let n = i as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let word = parts.next().unwrap_or_default();
        let args = parts.map(|s| parse_f64(s, n, word)).collect::<Result<Vec<_>, _>>()?;
        let arity = |lo: usize, hi: usize| {
            if (lo..=hi).contains(&args.len()) {
                Ok(())
            } else if lo == hi {
                Err(FormatError::at(n, format!("{word} takes {lo} arguments, found {}", args.len())))
            } else {
                Err(FormatError::at(n, format!("{word} takes {lo} to {hi} arguments, found {}", args.len())))
            }
        };
        match word {
            "duration" => {
                arity(1, 1)?;
                duration = Some(args[0]);
            }
            "dt" => {
                arity(1, 1)?;
                dt = args[0];
            }
            "setpoint" => {
                arity(4, 5)?;
                events.push(MissionEvent::Setpoint {
                    t: args[0],
                    roll: args[1].to_radians(),
                    pitch: args[2].to_radians(),
                    yaw_rate: args[3].to_radians(),
                    collective: args.get(4).copied(),
                });
            }
            "sigma" => {
                arity(2, 2)?;
                let inverted = match args[1] {
                    0.0 => false,
                    1.0 => true,
                    _ => return Err(FormatError::at(n, "sigma must be 0 or 1")),
                };
                events.push(MissionEvent::Sigma { t: args[0], inverted });
            }
            "mu" => {
                arity(2, 2)?;
                let mu = args[1];
                if !(mu == mu.floor() && (0.0..=4.0).contains(&mu)) {
                    return Err(FormatError::at(n, "mu must be an actuator index 0..4"));
                }
                events.push(MissionEvent::Mu { t: args[0], mu: mu as u8 });
            }
            "altitude" => {
                arity(2, 3)?;
                events.push(MissionEvent::Altitude { t: args[0], z: args[1], rate: args.get(2).copied() });
            }
            other => return Err(FormatError::at(n, format!("unknown directive {other:?}"))),
        }
    }
    let duration = duration.ok_or_else(|| FormatError::Invalid("mission has no duration line".into()))?;
    let script = MissionScript { events, duration, dt };
    script.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(script)
}

/// Inverse of [`parse_mission`] up to degree conversion rounding.
pub fn format_mission(script: &MissionScript) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "duration {}", script.duration);
    let _ = writeln!(s, "dt {}", script.dt);
    for e in &script.events {
        let _ = match *e {
            MissionEvent::Setpoint { t, roll, pitch, yaw_rate, collective } => {
                let c = collective.map(|c| format!(" {c}")).unwrap_or_default();
                writeln!(s, "setpoint {t} {} {} {}{c}", roll.to_degrees(), pitch.to_degrees(), yaw_rate.to_degrees())
            }
            MissionEvent::Sigma { t, inverted } => writeln!(s, "sigma {t} {}", inverted as u8),
            MissionEvent::Mu { t, mu } => writeln!(s, "mu {t} {mu}"),
            MissionEvent::Altitude { t, z, rate } => {
                let r = rate.map(|r| format!(" {r}")).unwrap_or_default();
                writeln!(s, "altitude {t} {z}{r}")
            }
        };
    }
    s
}

/// Metric windows as `start-end` pairs separated by commas, or `all`.
pub fn parse_windows(spec: &str) -> Result<Vec<(f64, f64)>, FormatError> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "all" {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|w| {
            let bad = || FormatError::Invalid(format!("bad window {w:?}; expected start-end"));
            let (a, b) = w.trim().split_once('-').ok_or_else(bad)?;
            let (a, b) = (a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?);
            if !(a < b) {
                return Err(bad());
            }
            Ok((a, b))
        })
        .collect()
}
