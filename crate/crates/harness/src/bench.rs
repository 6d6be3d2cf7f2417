//! Solver benchmark runs.

use mns_core::generator::Problem;
use mns_core::solver::{solve, Mode, SolveStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("budgets must be non-empty, positive and strictly ascending")]
    BadBudgets,
    #[error("at least one mode is required")]
    NoModes,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub modes: Vec<Mode>,
    pub budgets: Vec<u64>,
}

impl RunConfig {
    pub fn new(modes: Vec<Mode>, budgets: Vec<u64>) -> Result<RunConfig, ConfigError> {
        if modes.is_empty() {
            return Err(ConfigError::NoModes);
        }
        if budgets.is_empty() || budgets[0] == 0 || budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::BadBudgets);
        }
        Ok(RunConfig { modes, budgets })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Solved,
    Unsolved,
    /// The problem could not be turned into a solver view.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub problem_id: String,
    pub mode: Mode,
    pub budget: u64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<u8>,
    pub steps_used: u64,
    pub correct: bool,
    #[serde(rename = "type")]
    pub problem_type: String,
    pub interpretation: String,
    pub integer_count: usize,
}

/// Solves one problem from its public form and grades it against the
/// withheld answer.
pub fn solve_one(p: &Problem, mode: Mode, budget: u64) -> ResultRecord {
    let mut record = ResultRecord {
        problem_id: p.id.clone(),
        mode,
        budget,
        status: Status::Error,
        answer: None,
        steps_used: 0,
        correct: false,
        problem_type: p.spec.problem_type.name().to_string(),
        interpretation: p.spec.algebra.interpretation.kind().name().to_string(),
        integer_count: p.integer_count(),
    };
    let view = match p.public().view() {
        Ok(v) => v,
        Err(e) => {
            log::warn!("{}: {e}", p.id);
            return record;
        }
    };
    match solve(&view, mode, budget) {
        Ok(r) => {
            record.steps_used = r.steps_used;
            match r.status {
                SolveStatus::Solved { answer, .. } => {
                    record.status = Status::Solved;
                    record.answer = Some(answer);
                    record.correct = answer == p.answer;
                }
                SolveStatus::Unsolved => record.status = Status::Unsolved,
            }
        }
        Err(e) => log::warn!("{}: {e}", p.id),
    }
    record
}

/// One record per (problem, mode, budget), ordered by problem, then mode,
/// then budget.
pub fn cmd_solve(problems: &[Problem], cfg: &RunConfig) -> Vec<ResultRecord> {
    problems
        .par_iter()
        .flat_map_iter(|p| {
            cfg.modes
                .iter()
                .flat_map(move |&m| cfg.budgets.iter().map(move |&b| solve_one(p, m, b)))
                .collect::<Vec<_>>()
        })
        .collect()
}
