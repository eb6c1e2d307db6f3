//! Conjunctive Boolean network model and the reductions that bring
//! disjunctive networks, networks with control inputs, and networks with
//! AND-type outputs into the canonical "outputs are state variables" form.
//!
//! Indices are 0-based in the API. The text format and every user-facing
//! diagnostic use 1-based names (`x1`, `x2`, ...).

use std::fmt;

use thiserror::Error;

/// Structural problems with a network description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("x{var}: argument x{arg} is out of range (n = {n})")]
    ArgumentOutOfRange { var: usize, arg: usize, n: usize },
    #[error("x{var}: argument x{arg} appears more than once")]
    DuplicateArgument { var: usize, arg: usize },
    #[error("observed variable x{var} is out of range (n = {n})")]
    ObservedOutOfRange { var: usize, n: usize },
    #[error("x{var}: input u{input} is out of range ({inputs} inputs declared)")]
    InputOutOfRange {
        var: usize,
        input: usize,
        inputs: usize,
    },
    #[error("output {output} has an empty argument set")]
    EmptyOutput { output: usize },
    #[error("output {output}: argument x{arg} is out of range (n = {n})")]
    OutputArgumentOutOfRange { output: usize, arg: usize, n: usize },
}

/// A conjunctive Boolean network with outputs that read single state
/// variables.
///
/// `updates[i]` holds the sorted argument indices of `x_{i+1}`; the empty
/// set is the empty product, i.e. the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cbn {
    updates: Vec<Vec<usize>>,
    observed: Vec<bool>,
}

impl Cbn {
    /// Builds a network from per-variable argument lists and the list of
    /// directly observed variables. Arguments are sorted; duplicates are an
    /// error. Repeated observed indices are merged.
    pub fn new(
        updates: Vec<Vec<usize>>,
        observed: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let n = updates.len();
        let mut canonical = Vec::with_capacity(n);
        for (var, mut args) in updates.into_iter().enumerate() {
            args.sort_unstable();
            for w in args.windows(2) {
                if w[0] == w[1] {
                    return Err(ModelError::DuplicateArgument {
                        var: var + 1,
                        arg: w[0] + 1,
                    });
                }
            }
            if let Some(&arg) = args.last() {
                if arg >= n {
                    return Err(ModelError::ArgumentOutOfRange {
                        var: var + 1,
                        arg: arg + 1,
                        n,
                    });
                }
            }
            canonical.push(args);
        }
        let mut flags = vec![false; n];
        for var in observed {
            if var >= n {
                return Err(ModelError::ObservedOutOfRange { var: var + 1, n });
            }
            flags[var] = true;
        }
        Ok(Cbn {
            updates: canonical,
            observed: flags,
        })
    }

    /// Builds a network from an edge list, `(source, target)` meaning that
    /// `source` is an argument of `target`'s update.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        observed: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let mut updates = vec![Vec::new(); n];
        for (source, target) in edges {
            if target >= n {
                return Err(ModelError::ArgumentOutOfRange {
                    var: target + 1,
                    arg: source + 1,
                    n,
                });
            }
            updates[target].push(source);
        }
        Cbn::new(updates, observed)
    }

    pub fn n(&self) -> usize {
        self.updates.len()
    }

    pub fn args(&self, var: usize) -> &[usize] {
        &self.updates[var]
    }

    pub fn updates(&self) -> &[Vec<usize>] {
        &self.updates
    }

    pub fn is_observed(&self, var: usize) -> bool {
        self.observed[var]
    }

    pub fn observed_flags(&self) -> &[bool] {
        &self.observed
    }

    /// Observed variables in ascending order.
    pub fn observed(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.observed[i]).collect()
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn edge_count(&self) -> usize {
        self.updates.iter().map(Vec::len).sum()
    }

    /// Variables whose update has no arguments (constant 1).
    pub fn constant_variables(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.updates[i].is_empty())
            .collect()
    }

    /// Same dynamics with `extra` added to the observed set.
    pub fn with_observed(
        &self,
        extra: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let mut observed = self.observed.clone();
        for var in extra {
            if var >= self.n() {
                return Err(ModelError::ObservedOutOfRange {
                    var: var + 1,
                    n: self.n(),
                });
            }
            observed[var] = true;
        }
        Ok(Cbn {
            updates: self.updates.clone(),
            observed,
        })
    }

    /// Same dynamics with exactly `observed` as the observed set.
    pub fn with_observed_set(
        &self,
        observed: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        Cbn::new(self.updates.clone(), observed)
    }

    /// Evaluates one synchronous step. Empty updates evaluate to 1.
    pub fn step(&self, state: &[bool]) -> Vec<bool> {
        self.updates
            .iter()
            .map(|args| args.iter().all(|&j| state[j]))
            .collect()
    }
}

/// How the arguments of an update are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connective {
    #[default]
    And,
    Or,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connective::And => f.write_str("and"),
            Connective::Or => f.write_str("or"),
        }
    }
}

/// A disjunctive Boolean network: every update is the OR of its arguments
/// (the empty OR is the constant 0). The structure is stored as a [`Cbn`]
/// whose connective is reinterpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dbn {
    pub structure: Cbn,
}

/// Result of a reduction to canonical form, with a note about how the
/// reduced state relates to the original one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub cbn: Cbn,
    pub note: &'static str,
}

/// Reduces a DBN to a CBN by complementing every state variable.
///
/// With `z = !x`, `z_i(k+1) = !OR(x_j) = AND(z_j)`, and observing `x_j` is
/// the same as observing `z_j`. The dependency graph and observed set are
/// unchanged.
pub fn reduce_dbn(dbn: &Dbn) -> Reduced {
    Reduced {
        cbn: dbn.structure.clone(),
        note: "state variables of the reduced network are the complements of the original ones",
    }
}

/// A conjunctive Boolean control network. Each state update is the AND of
/// state arguments and input arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cbcn {
    state: Cbn,
    input_count: usize,
    input_args: Vec<Vec<usize>>,
}

impl Cbcn {
    /// `input_args[i]` lists the inputs feeding `x_{i+1}`.
    pub fn new(
        state: Cbn,
        input_count: usize,
        input_args: Vec<Vec<usize>>,
    ) -> Result<Self, ModelError> {
        let mut input_args = input_args;
        input_args.resize(state.n(), Vec::new());
        for (var, args) in input_args.iter_mut().enumerate() {
            args.sort_unstable();
            for w in args.windows(2) {
                if w[0] == w[1] {
                    return Err(ModelError::DuplicateArgument {
                        var: var + 1,
                        arg: w[0] + 1,
                    });
                }
            }
            if let Some(&u) = args.iter().find(|&&u| u >= input_count) {
                return Err(ModelError::InputOutOfRange {
                    var: var + 1,
                    input: u + 1,
                    inputs: input_count,
                });
            }
        }
        Ok(Cbcn {
            state,
            input_count,
            input_args,
        })
    }

    pub fn state(&self) -> &Cbn {
        &self.state
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn input_args(&self, var: usize) -> &[usize] {
        &self.input_args[var]
    }
}

/// Holds every input at 1, which removes the inputs from each AND.
pub fn reduce_cbcn(cbcn: &Cbcn) -> Reduced {
    Reduced {
        cbn: cbcn.state.clone(),
        note: "all control inputs are held at 1",
    }
}

/// A CBN whose outputs are ANDs over state variables instead of single
/// state variables. Any observed flags on `state` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralOutputCbn {
    state: Cbn,
    outputs: Vec<Vec<usize>>,
}

impl GeneralOutputCbn {
    pub fn new(state: Cbn, outputs: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let n = state.n();
        let mut canonical = Vec::with_capacity(outputs.len());
        for (j, mut args) in outputs.into_iter().enumerate() {
            if args.is_empty() {
                return Err(ModelError::EmptyOutput { output: j + 1 });
            }
            args.sort_unstable();
            args.dedup();
            if let Some(&arg) = args.last() {
                if arg >= n {
                    return Err(ModelError::OutputArgumentOutOfRange {
                        output: j + 1,
                        arg: arg + 1,
                        n,
                    });
                }
            }
            canonical.push(args);
        }
        Ok(GeneralOutputCbn {
            state,
            outputs: canonical,
        })
    }

    pub fn state(&self) -> &Cbn {
        &self.state
    }

    pub fn outputs(&self) -> &[Vec<usize>] {
        &self.outputs
    }
}

/// Adds one relay variable per output: `x_{n+j}(k+1) = g_j(x(k))`, and
/// observes exactly the relays. The relay outputs are the original outputs
/// delayed by one step.
pub fn reduce_general_outputs(g: &GeneralOutputCbn) -> Reduced {
    let n = g.state.n();
    let mut updates = g.state.updates.clone();
    updates.extend(g.outputs.iter().cloned());
    let observed = n..n + g.outputs.len();
    let cbn = Cbn::new(updates, observed).expect("relay arguments were validated");
    Reduced {
        cbn,
        note: "relay variables observe the original outputs with a one-step delay",
    }
}
