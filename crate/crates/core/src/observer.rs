//! Initial-state reconstruction for observable networks.
//!
//! Each observed path acts as a shift register: the node at position `i`
//! (1-based) of a path of length `q` reaches the observed end after `q - i`
//! steps, so `x(0)` is read off the output samples in reverse path order.

use std::io::{Read, Write};

use thiserror::Error;

use crate::graph::DependencyGraph;
use crate::network::Cbn;
use crate::observability::{decompose, verdict, ObservabilityVerdict, ObservedPathCover};

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("network is not observable")]
    NotObservable(ObservabilityVerdict),
    #[error("trace has {got} samples but the observer needs {required}")]
    TraceTooShort { required: usize, got: usize },
    #[error("trace is inconsistent with the network: y{output} differs at k = {k}")]
    InconsistentTrace { output: usize, k: usize },
    #[error("trace does not contain a column for observed variable x{0}")]
    MissingOutput(usize),
    #[error("trace column y{0} is not an observed variable")]
    UnexpectedOutput(usize),
    #[error("state has {got} entries, network has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trace CSV: {0}")]
    Csv(String),
}

/// States `x(0) .. x(steps - 1)` and the matching output samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<Vec<bool>>,
    pub trace: OutputTrace,
}

/// Runs the network for `steps` samples starting at `x0`.
pub fn simulate(cbn: &Cbn, x0: &[bool], steps: usize) -> Result<Trajectory, ObserverError> {
    if x0.len() != cbn.n() {
        return Err(ObserverError::DimensionMismatch {
            expected: cbn.n(),
            got: x0.len(),
        });
    }
    let observed = cbn.observed();
    let mut states = Vec::with_capacity(steps);
    let mut values = vec![Vec::with_capacity(steps); observed.len()];
    let mut x = x0.to_vec();
    for k in 0..steps {
        for (col, &o) in observed.iter().enumerate() {
            values[col].push(x[o]);
        }
        if k + 1 < steps {
            let next = cbn.step(&x);
            states.push(std::mem::replace(&mut x, next));
        } else {
            states.push(x.clone());
        }
    }
    Ok(Trajectory {
        states,
        trace: OutputTrace {
            outputs: observed,
            values,
        },
    })
}

/// Output samples `y_j(0..N)`, one sequence per observed variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputTrace {
    /// Observed variable behind each column.
    pub outputs: Vec<usize>,
    pub values: Vec<Vec<bool>>,
}

impl OutputTrace {
    pub fn horizon(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Samples of observed variable `var`.
    pub fn series(&self, var: usize) -> Option<&[bool]> {
        self.outputs
            .iter()
            .position(|&o| o == var)
            .map(|col| self.values[col].as_slice())
    }

    /// Reads `k,y<i1>,y<i2>,...` with one row per time step.
    pub fn read_csv(reader: impl Read) -> Result<Self, ObserverError> {
        let csv_err = |e: csv::Error| ObserverError::Csv(e.to_string());
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.get(0) != Some("k") {
            return Err(ObserverError::Csv("first column must be `k`".into()));
        }
        let mut outputs = Vec::new();
        for h in headers.iter().skip(1) {
            let idx = h
                .strip_prefix('y')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| ObserverError::Csv(format!("bad column header `{h}`")))?;
            if outputs.contains(&(idx - 1)) {
                return Err(ObserverError::Csv(format!("duplicate column `{h}`")));
            }
            outputs.push(idx - 1);
        }
        let mut values = vec![Vec::new(); outputs.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let k: usize = record[0]
                .parse()
                .map_err(|_| ObserverError::Csv(format!("row {}: bad time index", row + 1)))?;
            if k != row {
                return Err(ObserverError::Csv(format!(
                    "row {}: expected k = {row}, found {k}",
                    row + 1
                )));
            }
            for (col, field) in record.iter().skip(1).enumerate() {
                let bit = match field {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(ObserverError::Csv(format!(
                            "row {}: expected 0 or 1, found `{other}`",
                            row + 1
                        )))
                    }
                };
                values[col].push(bit);
            }
        }
        Ok(OutputTrace { outputs, values })
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), ObserverError> {
        let csv_err = |e: csv::Error| ObserverError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["k".to_string()];
        header.extend(self.outputs.iter().map(|o| format!("y{}", o + 1)));
        w.write_record(&header).map_err(csv_err)?;
        for k in 0..self.horizon() {
            let mut row = vec![k.to_string()];
            row.extend(
                self.values
                    .iter()
                    .map(|v| if v[k] { "1" } else { "0" }.to_string()),
            );
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| ObserverError::Csv(e.to_string()))
    }
}

/// Where each state variable's initial value appears in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSample {
    /// Observed variable whose output carries the value.
    pub output: usize,
    /// Time index at which it appears.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverPlan {
    pub cbn: Cbn,
    pub cover: ObservedPathCover,
    /// Number of output samples needed.
    pub horizon: usize,
    /// Indexed by state variable.
    pub sources: Vec<SourceSample>,
}

pub fn build_observer(cbn: &Cbn) -> Result<ObserverPlan, ObserverError> {
    let g = DependencyGraph::new(cbn);
    let cover = decompose(&g).map_err(|_| ObserverError::NotObservable(verdict(&g)))?;
    let mut sources = vec![None; cbn.n()];
    for path in &cover.paths {
        let q = path.len();
        let output = path.output();
        for (pos, &v) in path.nodes.iter().enumerate() {
            sources[v] = Some(SourceSample {
                output,
                offset: q - 1 - pos,
            });
        }
    }
    let sources = sources
        .into_iter()
        .map(|s| s.expect("decomposition covers every node"))
        .collect();
    Ok(ObserverPlan {
        cbn: cbn.clone(),
        horizon: cover.longest(),
        cover,
        sources,
    })
}

pub fn reconstruct_initial_state(
    plan: &ObserverPlan,
    trace: &OutputTrace,
) -> Result<Vec<bool>, ObserverError> {
    let observed = plan.cbn.observed();
    if let Some(&extra) = trace.outputs.iter().find(|o| !plan.cbn.is_observed(**o)) {
        return Err(ObserverError::UnexpectedOutput(extra + 1));
    }
    if let Some(&missing) = observed.iter().find(|&&o| trace.series(o).is_none()) {
        return Err(ObserverError::MissingOutput(missing + 1));
    }
    let got = trace.horizon();
    if got < plan.horizon {
        return Err(ObserverError::TraceTooShort {
            required: plan.horizon,
            got,
        });
    }
    let x0: Vec<bool> = plan
        .sources
        .iter()
        .map(|s| trace.series(s.output).expect("checked above")[s.offset])
        .collect();

    let replay = simulate(&plan.cbn, &x0, got)?;
    for &o in &observed {
        let expected = trace.series(o).expect("checked above");
        let actual = replay.trace.series(o).expect("simulated outputs");
        if let Some(k) = (0..got).find(|&k| expected[k] != actual[k]) {
            return Err(ObserverError::InconsistentTrace { output: o + 1, k });
        }
    }
    Ok(x0)
}
