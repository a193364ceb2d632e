//! Plain-text lattice snapshots and Q-table dumps.
//!
//! A grid file has one line per lattice row, integer codes separated by
//! single spaces. State grids use 0 = empty, 1 = cooperator, 2 = defector.
//! Action grids use 0 = empty and 1..=5 for C, D, M, B, P.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dilemma_core::dynamics::World;
use dilemma_core::game::Strategy;
use dilemma_core::lattice::SiteIndex;
use dilemma_core::learning::ActionKind;

use crate::error::OutputError;

pub fn state_code(s: Strategy) -> u8 {
    match s {
        Strategy::Cooperate => 1,
        Strategy::Defect => 2,
    }
}

pub fn action_code(a: ActionKind) -> u8 {
    a.index() as u8 + 1
}

fn grid<R>(world: &World<R>, code: impl Fn(&dilemma_core::dynamics::Agent) -> u8) -> Vec<Vec<u8>> {
    let side = world.side();
    (0..side)
        .map(|row| {
            (0..side)
                .map(|col| world.agent_at(SiteIndex::new(row, col)).map_or(0, &code))
                .collect()
        })
        .collect()
}

pub fn state_grid<R>(world: &World<R>) -> Vec<Vec<u8>> {
    grid(world, |a| state_code(a.strategy))
}

pub fn action_grid<R>(world: &World<R>) -> Vec<Vec<u8>> {
    grid(world, |a| action_code(a.last_action))
}

pub fn format_grid(grid: &[Vec<u8>]) -> String {
    let mut out = String::new();
    for row in grid {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a square grid, checking every code against `max_code`.
pub fn parse_grid(text: &str, max_code: u8) -> Result<Vec<Vec<u8>>, (usize, String)> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| match t.parse::<u8>() {
                Ok(v) if v <= max_code => Ok(v),
                _ => Err((i + 1, format!("bad cell {t:?}"))),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err((i + 1, format!("expected {n} cells, got {}", rows[i].len())));
    }
    Ok(rows)
}

pub fn read_grid(path: &Path, max_code: u8) -> Result<Vec<Vec<u8>>, OutputError> {
    let text = fs::read_to_string(path).map_err(|e| OutputError::io(path, e))?;
    parse_grid(&text, max_code).map_err(|(line, message)| OutputError::Format {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Writes `{tag}_state.txt` and `{tag}_action.txt` into `dir`.
pub fn dump_snapshot<R>(
    world: &World<R>,
    dir: &Path,
    tag: &str,
) -> Result<[PathBuf; 2], OutputError> {
    let state = dir.join(format!("{tag}_state.txt"));
    let action = dir.join(format!("{tag}_action.txt"));
    fs::write(&state, format_grid(&state_grid(world))).map_err(|e| OutputError::io(&state, e))?;
    fs::write(&action, format_grid(&action_grid(world)))
        .map_err(|e| OutputError::io(&action, e))?;
    Ok([state, action])
}

/// One line per agent in id order: row, column, then the Q-table row by row.
pub fn format_qtables<R>(world: &World<R>) -> String {
    let mut out = String::new();
    for a in world.agents() {
        let _ = write!(out, "{} {}", a.site.row, a.site.col);
        for v in a.qtable.iter() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn dump_qtables<R>(world: &World<R>, path: &Path) -> Result<(), OutputError> {
    fs::write(path, format_qtables(world)).map_err(|e| OutputError::io(path, e))
}
