//! Loading per-user predicted scores and turning them into selection
//! problems.
//!
//! Input is a UTF-8 CSV with header `user_id,item_id,score`, one row per
//! (user, item) pair. A row with empty `item_id` and `score` declares a user
//! without items.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::DEFAULT_SENSITIVITY_FLOOR;
use crate::problem::{make_problem, SelectionProblem};
use crate::stats::quantile_sorted;

pub const DEFAULT_TOP_K: usize = 500;
pub const INGEST_QUANTILE_LO: f64 = 0.01;
pub const INGEST_QUANTILE_HI: f64 = 0.99;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreMatrixFile {
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Per user, `(item index, score)` pairs in file order.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ScoreMatrixFile {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let expected = ["user_id", "item_id", "score"];
        if header.len() != 3 || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Malformed {
                line: 1,
                reason: "header must be user_id,item_id,score".into(),
            });
        }
        let mut m = ScoreMatrixFile::default();
        let mut user_index: HashMap<String, usize> = HashMap::new();
        let mut item_index: HashMap<String, usize> = HashMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 3 {
                return Err(Error::Malformed {
                    line,
                    reason: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let user = record[0].to_string();
            if user.is_empty() {
                return Err(Error::Malformed {
                    line,
                    reason: "empty user_id".into(),
                });
            }
            let u = *user_index.entry(user.clone()).or_insert_with(|| {
                m.user_ids.push(user);
                m.rows.push(Vec::new());
                m.rows.len() - 1
            });
            if record[1].is_empty() && record[2].is_empty() {
                continue;
            }
            let score: f64 = record[2].parse().map_err(|_| Error::Malformed {
                line,
                reason: format!("score `{}` is not a number", &record[2]),
            })?;
            if !score.is_finite() {
                return Err(Error::Malformed {
                    line,
                    reason: "score is not finite".into(),
                });
            }
            if record[1].is_empty() {
                return Err(Error::Malformed {
                    line,
                    reason: "empty item_id".into(),
                });
            }
            let item = record[1].to_string();
            let a = *item_index.entry(item.clone()).or_insert_with(|| {
                m.item_ids.push(item);
                m.item_ids.len() - 1
            });
            m.rows[u].push((a, score));
        }
        Ok(m)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Per-item `p99 − p1` of the scores across users, floored at `1e-6`.
    /// Items nobody scored get the floor.
    pub fn item_sensitivities(&self) -> Vec<f64> {
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); self.item_ids.len()];
        for row in &self.rows {
            for &(a, s) in row {
                columns[a].push(s);
            }
        }
        columns
            .iter_mut()
            .map(|col| {
                if col.is_empty() {
                    return DEFAULT_SENSITIVITY_FLOOR;
                }
                col.sort_by(f64::total_cmp);
                let width = quantile_sorted(col, INGEST_QUANTILE_HI) - quantile_sorted(col, INGEST_QUANTILE_LO);
                width.max(DEFAULT_SENSITIVITY_FLOOR)
            })
            .collect()
    }
}

/// One user's selection problem over their top-scored items.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserProblem {
    pub user_id: String,
    pub item_ids: Vec<String>,
    #[serde(skip)]
    pub problem: SelectionProblem,
}

/// Build a problem per user from their `top_k` highest-scored items
/// (descending score, ties by file order), with globally estimated item
/// sensitivities. Users without items are skipped with a warning.
pub fn ingest_scores(file: &ScoreMatrixFile, top_k: usize) -> Result<Vec<UserProblem>> {
    if top_k == 0 {
        return Err(Error::param("top_k", 0.0, "must be positive"));
    }
    let sens = file.item_sensitivities();
    let mut out = Vec::with_capacity(file.rows.len());
    for (u, row) in file.rows.iter().enumerate() {
        if row.is_empty() {
            warn!("user {} has no scored items, skipping", file.user_ids[u]);
            continue;
        }
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&i, &j| row[j].1.total_cmp(&row[i].1).then(i.cmp(&j)));
        order.truncate(top_k);
        let scores = order.iter().map(|&i| row[i].1).collect();
        let deltas = order.iter().map(|&i| sens[row[i].0]).collect();
        out.push(UserProblem {
            user_id: file.user_ids[u].clone(),
            item_ids: order.iter().map(|&i| file.item_ids[row[i].0].clone()).collect(),
            problem: make_problem(scores, deltas)?,
        });
    }
    Ok(out)
}
