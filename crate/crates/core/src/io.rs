//! CSV serialization with versioned schema headers.
//!
//! Files start with `# key=value` comment lines carrying the schema id,
//! interpolation kind, state-space tag, and any caller-supplied metadata
//! (the CLI embeds the resolved run configuration there), followed by a
//! header row and data rows. Floats use the shortest round-trip decimal
//! form, so identical values always serialize to identical bytes.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::hjb::GridFunction;
use crate::state::StatePoint;
use crate::trajectory::{PathKind, Trajectory, TrajectoryError};

pub const TRAJECTORY_SCHEMA: &str = "trajectory.v1";
pub const GRID_FUNCTION_SCHEMA: &str = "gridfunction.v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("file does not declare schema {expected}")]
    WrongSchema { expected: &'static str },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

/// Write a trajectory as CSV: metadata comments, then `t,x_1..x_d`.
pub fn write_trajectory(
    w: &mut impl Write,
    traj: &Trajectory,
    meta: &[(String, String)],
) -> Result<(), IoError> {
    writeln!(w, "# schema={TRAJECTORY_SCHEMA}")?;
    let kind = match traj.kind() {
        PathKind::PiecewiseConstant => "piecewise-constant",
        PathKind::PiecewiseLinear => "piecewise-linear",
    };
    writeln!(w, "# kind={kind}")?;
    let space = if traj.start().is_cube() { "cube" } else { "simplex" };
    writeln!(w, "# space={space}")?;
    for (key, value) in meta {
        writeln!(w, "# {key}={value}")?;
    }
    write!(w, "t")?;
    for i in 1..=traj.dim() {
        write!(w, ",x_{i}")?;
    }
    writeln!(w)?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        write!(w, "{t}")?;
        for v in state.coords() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a trajectory written by [`write_trajectory`].
pub fn read_trajectory(r: impl BufRead) -> Result<Trajectory, IoError> {
    let mut kind = None;
    let mut space = None;
    let mut schema_seen = false;
    let mut times = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut header_seen = false;

    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "schema" => schema_seen = value.trim() == TRAJECTORY_SCHEMA,
                    "kind" => kind = Some(value.trim().to_string()),
                    "space" => space = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if !header_seen {
            // Header row `t,x_1,...`.
            if !line.starts_with('t') {
                return Err(parse_err(idx + 1, "expected header row starting with `t`"));
            }
            header_seen = true;
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .ok_or_else(|| parse_err(idx + 1, "empty row"))?
            .trim()
            .parse()
            .map_err(|e| parse_err(idx + 1, format!("bad time: {e}")))?;
        let row: Vec<f64> = fields
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(idx + 1, format!("bad coordinate: {e}")))?;
        times.push(t);
        coords.push(row);
    }
    if !schema_seen {
        return Err(IoError::WrongSchema { expected: TRAJECTORY_SCHEMA });
    }
    let kind = match kind.as_deref() {
        Some("piecewise-constant") => PathKind::PiecewiseConstant,
        Some("piecewise-linear") => PathKind::PiecewiseLinear,
        other => {
            return Err(parse_err(0, format!("missing or unknown kind {other:?}")));
        }
    };
    let is_cube = match space.as_deref() {
        Some("cube") => true,
        Some("simplex") => false,
        other => return Err(parse_err(0, format!("missing or unknown space {other:?}"))),
    };
    let states: Vec<StatePoint> = coords
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            if is_cube {
                StatePoint::cube(row)
            } else {
                StatePoint::simplex(row)
            }
            .map_err(|e| parse_err(i + 1, format!("state: {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Trajectory::new(times, states, kind)?)
}

/// Write a grid function as CSV: node coordinates plus value.
pub fn write_grid_function(
    w: &mut impl Write,
    f: &GridFunction,
    meta: &[(String, String)],
) -> Result<(), IoError> {
    writeln!(w, "# schema={GRID_FUNCTION_SCHEMA}")?;
    for (key, value) in meta {
        writeln!(w, "# {key}={value}")?;
    }
    let d = f.grid().d();
    for i in 1..=d {
        write!(w, "x_{i},")?;
    }
    writeln!(w, "value")?;
    for (node, value) in f.grid().nodes().iter().zip(f.values()) {
        for c in node {
            write!(w, "{c},")?;
        }
        writeln!(w, "{value}")?;
    }
    Ok(())
}

/// Write a single-row CSV (used by the point-evaluation commands).
pub fn write_single_row(
    w: &mut impl Write,
    schema: &str,
    meta: &[(String, String)],
    columns: &[&str],
    values: &[String],
) -> Result<(), IoError> {
    writeln!(w, "# schema={schema}")?;
    for (key, value) in meta {
        writeln!(w, "# {key}={value}")?;
    }
    writeln!(w, "{}", columns.join(","))?;
    writeln!(w, "{}", values.join(","))?;
    Ok(())
}
