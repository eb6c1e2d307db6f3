//! Line-oriented text format for networks.
//!
//! ```text
//! # comment
//! mode: and            # or `mode: or` for a disjunctive network
//! input u1 u2          # control inputs
//! x1 <- x2 u1
//! x2 <- true           # empty product
//! observe x1
//! output x1 x2         # one AND-type output over the listed variables
//! ```
//!
//! Plain networks only use update and `observe` lines. Serialization is
//! deterministic: variables and arguments ascending.

use std::fmt::Write as _;

use thiserror::Error;

use crate::network::{Cbcn, Cbn, Connective, Dbn, GeneralOutputCbn, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("undefined variable {0}")]
    UndefinedVariable(String),
    #[error("undefined input {0}")]
    UndefinedInput(String),
    #[error("duplicate update line for x{0}")]
    DuplicateUpdate(usize),
    #[error("duplicate argument {0}")]
    DuplicateArgument(String),
    #[error("observed variable x{0} is out of range")]
    ObservedOutOfRange(usize),
    #[error("missing update line for x{0}")]
    MissingUpdate(usize),
    #[error("{0}")]
    Unsupported(String),
}

/// Parse failure with a 1-based source location. `line == 0` means the
/// problem concerns the document as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

/// An argument of an update line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    State(usize),
    Input(usize),
}

/// Everything a network file can express, before choosing an
/// interpretation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkDocument {
    pub connective: Connective,
    pub input_count: usize,
    /// Per variable, state and input arguments, sorted.
    pub updates: Vec<Vec<Arg>>,
    /// Directly observed variables, ascending.
    pub observed: Vec<usize>,
    /// AND-type outputs.
    pub outputs: Vec<Vec<usize>>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut col = 0;
    let mut start_col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..byte],
                    column: start_col,
                });
            }
        } else if start.is_none() {
            start = Some(byte);
            start_col = col;
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: start_col,
        });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Parses `<prefix><k>` with `k >= 1`, returning `k - 1`.
fn indexed(text: &str, prefix: char) -> Option<usize> {
    let rest = text.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    match rest.parse::<usize>() {
        Ok(k) if k >= 1 => Some(k - 1),
        _ => None,
    }
}

struct PendingRef {
    line: usize,
    column: usize,
    index: usize,
    text: String,
}

pub fn parse_document(text: &str) -> Result<NetworkDocument, ParseError> {
    let mut connective: Option<Connective> = None;
    let mut inputs_declared: Vec<(usize, usize, usize)> = Vec::new();
    let mut updates: Vec<Option<(usize, Vec<Arg>)>> = Vec::new();
    let mut state_refs: Vec<PendingRef> = Vec::new();
    let mut input_refs: Vec<PendingRef> = Vec::new();
    let mut observed_refs: Vec<PendingRef> = Vec::new();
    let mut outputs: Vec<Vec<usize>> = Vec::new();
    let mut saw_update = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokens(strip_comment(raw));
        let Some(first) = toks.first() else {
            continue;
        };

        if first.text == "mode:" || first.text.starts_with("mode:") {
            let value = if first.text == "mode:" {
                toks.get(1).map(|t| (t.text, t.column))
            } else {
                Some((&first.text[5..], first.column + 5))
            };
            let extra = if first.text == "mode:" { 2 } else { 1 };
            let Some((value, vcol)) = value else {
                return Err(ParseError::at(
                    line_no,
                    first.column,
                    ParseErrorKind::Syntax("expected `and` or `or` after `mode:`".into()),
                ));
            };
            if let Some(t) = toks.get(extra) {
                return Err(ParseError::at(
                    line_no,
                    t.column,
                    ParseErrorKind::Syntax("unexpected token after mode".into()),
                ));
            }
            if connective.is_some() || saw_update {
                return Err(ParseError::at(
                    line_no,
                    first.column,
                    ParseErrorKind::Syntax(
                        "mode header must appear once, before any update".into(),
                    ),
                ));
            }
            connective = Some(match value {
                "and" => Connective::And,
                "or" => Connective::Or,
                other => {
                    return Err(ParseError::at(
                        line_no,
                        vcol,
                        ParseErrorKind::Syntax(format!("unknown mode `{other}`")),
                    ))
                }
            });
            continue;
        }

        match first.text {
            "input" => {
                if toks.len() < 2 {
                    return Err(ParseError::at(
                        line_no,
                        first.column,
                        ParseErrorKind::Syntax("expected at least one input name".into()),
                    ));
                }
                for t in &toks[1..] {
                    let Some(k) = indexed(t.text, 'u') else {
                        return Err(ParseError::at(
                            line_no,
                            t.column,
                            ParseErrorKind::Syntax(format!(
                                "expected input name u<k>, found `{}`",
                                t.text
                            )),
                        ));
                    };
                    if inputs_declared.iter().any(|&(d, _, _)| d == k) {
                        return Err(ParseError::at(
                            line_no,
                            t.column,
                            ParseErrorKind::Syntax(format!("input u{} declared twice", k + 1)),
                        ));
                    }
                    inputs_declared.push((k, line_no, t.column));
                }
            }
            "observe" | "output" => {
                if toks.len() < 2 {
                    return Err(ParseError::at(
                        line_no,
                        first.column,
                        ParseErrorKind::Syntax(format!(
                            "expected variables after `{}`",
                            first.text
                        )),
                    ));
                }
                let mut args = Vec::new();
                for t in &toks[1..] {
                    let Some(k) = indexed(t.text, 'x') else {
                        return Err(ParseError::at(
                            line_no,
                            t.column,
                            ParseErrorKind::Syntax(format!(
                                "expected variable name x<i>, found `{}`",
                                t.text
                            )),
                        ));
                    };
                    if first.text == "output" {
                        if args.contains(&k) {
                            return Err(ParseError::at(
                                line_no,
                                t.column,
                                ParseErrorKind::DuplicateArgument(t.text.to_string()),
                            ));
                        }
                        args.push(k);
                        state_refs.push(PendingRef {
                            line: line_no,
                            column: t.column,
                            index: k,
                            text: t.text.to_string(),
                        });
                    } else {
                        observed_refs.push(PendingRef {
                            line: line_no,
                            column: t.column,
                            index: k,
                            text: t.text.to_string(),
                        });
                    }
                }
                if first.text == "output" {
                    args.sort_unstable();
                    outputs.push(args);
                }
            }
            head => {
                let Some(var) = indexed(head, 'x') else {
                    return Err(ParseError::at(
                        line_no,
                        first.column,
                        ParseErrorKind::Syntax(format!("unexpected token `{head}`")),
                    ));
                };
                match toks.get(1) {
                    Some(t) if t.text == "<-" => {}
                    Some(t) => {
                        return Err(ParseError::at(
                            line_no,
                            t.column,
                            ParseErrorKind::Syntax(format!("expected `<-`, found `{}`", t.text)),
                        ))
                    }
                    None => {
                        return Err(ParseError::at(
                            line_no,
                            first.column + head.chars().count(),
                            ParseErrorKind::Syntax("expected `<-`".into()),
                        ))
                    }
                }
                let rhs = &toks[2..];
                if rhs.is_empty() {
                    return Err(ParseError::at(
                        line_no,
                        toks[1].column + 2,
                        ParseErrorKind::Syntax("empty right side; write `true`".into()),
                    ));
                }
                let mut args = Vec::new();
                if rhs.len() == 1 && rhs[0].text == "true" {
                    // empty product
                } else {
                    for t in rhs {
                        let arg = if let Some(j) = indexed(t.text, 'x') {
                            state_refs.push(PendingRef {
                                line: line_no,
                                column: t.column,
                                index: j,
                                text: t.text.to_string(),
                            });
                            Arg::State(j)
                        } else if let Some(u) = indexed(t.text, 'u') {
                            input_refs.push(PendingRef {
                                line: line_no,
                                column: t.column,
                                index: u,
                                text: t.text.to_string(),
                            });
                            Arg::Input(u)
                        } else {
                            return Err(ParseError::at(
                                line_no,
                                t.column,
                                ParseErrorKind::Syntax(format!(
                                    "expected argument x<j> or u<k>, found `{}`",
                                    t.text
                                )),
                            ));
                        };
                        if args.contains(&arg) {
                            return Err(ParseError::at(
                                line_no,
                                t.column,
                                ParseErrorKind::DuplicateArgument(t.text.to_string()),
                            ));
                        }
                        args.push(arg);
                    }
                }
                args.sort_unstable();
                if updates.len() <= var {
                    updates.resize(var + 1, None);
                }
                if updates[var].is_some() {
                    return Err(ParseError::at(
                        line_no,
                        first.column,
                        ParseErrorKind::DuplicateUpdate(var + 1),
                    ));
                }
                updates[var] = Some((line_no, args));
                saw_update = true;
            }
        }
    }

    let n = updates.len();
    let mut resolved = Vec::with_capacity(n);
    for (i, u) in updates.into_iter().enumerate() {
        match u {
            Some((_, args)) => resolved.push(args),
            None => return Err(ParseError::at(0, 0, ParseErrorKind::MissingUpdate(i + 1))),
        }
    }
    // Report the earliest bad reference first.
    state_refs.sort_by_key(|r| (r.line, r.column));
    if let Some(r) = state_refs.iter().find(|r| r.index >= n) {
        return Err(ParseError::at(
            r.line,
            r.column,
            ParseErrorKind::UndefinedVariable(r.text.clone()),
        ));
    }
    inputs_declared.sort_unstable();
    for (pos, &(k, line, col)) in inputs_declared.iter().enumerate() {
        if k != pos {
            return Err(ParseError::at(
                line,
                col,
                ParseErrorKind::UndefinedInput(format!(
                    "u{} (inputs must be numbered u1..uK)",
                    pos + 1
                )),
            ));
        }
    }
    let input_count = inputs_declared.len();
    input_refs.sort_by_key(|r| (r.line, r.column));
    if let Some(r) = input_refs.iter().find(|r| r.index >= input_count) {
        return Err(ParseError::at(
            r.line,
            r.column,
            ParseErrorKind::UndefinedInput(r.text.clone()),
        ));
    }
    let mut observed = Vec::new();
    for r in &observed_refs {
        if r.index >= n {
            return Err(ParseError::at(
                r.line,
                r.column,
                ParseErrorKind::ObservedOutOfRange(r.index + 1),
            ));
        }
        observed.push(r.index);
    }
    observed.sort_unstable();
    observed.dedup();

    Ok(NetworkDocument {
        connective: connective.unwrap_or_default(),
        input_count,
        updates: resolved,
        observed,
        outputs,
    })
}

fn model_error(e: ModelError) -> ParseError {
    ParseError::at(0, 0, ParseErrorKind::Unsupported(e.to_string()))
}

impl NetworkDocument {
    pub fn n(&self) -> usize {
        self.updates.len()
    }

    fn state_updates(&self) -> Vec<Vec<usize>> {
        self.updates
            .iter()
            .map(|args| {
                args.iter()
                    .filter_map(|a| match a {
                        Arg::State(j) => Some(*j),
                        Arg::Input(_) => None,
                    })
                    .collect()
            })
            .collect()
    }

    fn input_updates(&self) -> Vec<Vec<usize>> {
        self.updates
            .iter()
            .map(|args| {
                args.iter()
                    .filter_map(|a| match a {
                        Arg::Input(u) => Some(*u),
                        Arg::State(_) => None,
                    })
                    .collect()
            })
            .collect()
    }

    fn require(&self, what: &str, ok: bool) -> Result<(), ParseError> {
        if ok {
            Ok(())
        } else {
            Err(ParseError::at(
                0,
                0,
                ParseErrorKind::Unsupported(what.to_string()),
            ))
        }
    }

    /// Interprets the document as a plain CBN: `mode: and`, no inputs, no
    /// AND-type outputs.
    pub fn to_cbn(&self) -> Result<Cbn, ParseError> {
        self.require(
            "disjunctive network (mode: or); reduce it first",
            self.connective == Connective::And,
        )?;
        self.require(
            "network declares control inputs; reduce it first",
            self.input_count == 0,
        )?;
        self.require(
            "network declares AND-type outputs; reduce it first",
            self.outputs.is_empty(),
        )?;
        Cbn::new(self.state_updates(), self.observed.iter().copied()).map_err(model_error)
    }

    pub fn to_dbn(&self) -> Result<Dbn, ParseError> {
        self.require("expected `mode: or`", self.connective == Connective::Or)?;
        self.require(
            "a disjunctive network may not declare inputs",
            self.input_count == 0,
        )?;
        self.require(
            "a disjunctive network may not declare AND-type outputs",
            self.outputs.is_empty(),
        )?;
        let structure =
            Cbn::new(self.state_updates(), self.observed.iter().copied()).map_err(model_error)?;
        Ok(Dbn { structure })
    }

    pub fn to_cbcn(&self) -> Result<Cbcn, ParseError> {
        self.require(
            "a control network must use `mode: and`",
            self.connective == Connective::And,
        )?;
        self.require(
            "a control network may not declare AND-type outputs",
            self.outputs.is_empty(),
        )?;
        let state =
            Cbn::new(self.state_updates(), self.observed.iter().copied()).map_err(model_error)?;
        Cbcn::new(state, self.input_count, self.input_updates()).map_err(model_error)
    }

    pub fn to_general_output(&self) -> Result<GeneralOutputCbn, ParseError> {
        self.require("expected `mode: and`", self.connective == Connective::And)?;
        self.require("network declares control inputs", self.input_count == 0)?;
        self.require(
            "use `output` lines for AND-type outputs, not `observe`",
            self.observed.is_empty(),
        )?;
        let state = Cbn::new(self.state_updates(), []).map_err(model_error)?;
        GeneralOutputCbn::new(state, self.outputs.clone()).map_err(model_error)
    }

    /// Canonical text for the document.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.connective == Connective::Or {
            out.push_str("mode: or\n");
        }
        if self.input_count > 0 {
            out.push_str("input");
            for k in 0..self.input_count {
                let _ = write!(out, " u{}", k + 1);
            }
            out.push('\n');
        }
        for (i, args) in self.updates.iter().enumerate() {
            let _ = write!(out, "x{} <-", i + 1);
            if args.is_empty() {
                out.push_str(" true");
            }
            for a in args {
                match a {
                    Arg::State(j) => {
                        let _ = write!(out, " x{}", j + 1);
                    }
                    Arg::Input(u) => {
                        let _ = write!(out, " u{}", u + 1);
                    }
                }
            }
            out.push('\n');
        }
        if !self.observed.is_empty() {
            out.push_str("observe");
            for j in &self.observed {
                let _ = write!(out, " x{}", j + 1);
            }
            out.push('\n');
        }
        for g in &self.outputs {
            out.push_str("output");
            for j in g {
                let _ = write!(out, " x{}", j + 1);
            }
            out.push('\n');
        }
        out
    }
}

impl From<&Cbn> for NetworkDocument {
    fn from(cbn: &Cbn) -> Self {
        NetworkDocument {
            connective: Connective::And,
            input_count: 0,
            updates: cbn
                .updates()
                .iter()
                .map(|args| args.iter().map(|&j| Arg::State(j)).collect())
                .collect(),
            observed: cbn.observed(),
            outputs: Vec::new(),
        }
    }
}

/// Parses a plain CBN.
pub fn parse_cbn(text: &str) -> Result<Cbn, ParseError> {
    parse_document(text)?.to_cbn()
}

/// Canonical text for a CBN.
pub fn serialize_cbn(cbn: &Cbn) -> String {
    NetworkDocument::from(cbn).to_text()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_variable_example() {
        let cbn = parse_cbn("x1 <- x2\nx2 <- x1 x2\nobserve x1").unwrap();
        assert_eq!(cbn.n(), 2);
        assert_eq!(cbn.updates(), &[vec![1], vec![0, 1]]);
        assert_eq!(cbn.observed(), vec![0]);
    }

    #[test]
    fn parses_self_loop() {
        let cbn = parse_cbn("x1 <- x1\nobserve x1").unwrap();
        assert_eq!(cbn.updates(), &[vec![0]]);
        assert_eq!(cbn.observed(), vec![0]);
    }

    #[test]
    fn duplicate_argument_is_an_error() {
        let err = parse_cbn("x1 <- x2 x2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateArgument("x2".into()));
        assert_eq!((err.line, err.column), (1, 10));
    }

    #[test]
    fn undefined_variable_reports_location() {
        let err = parse_cbn("x1 <- x2\n\nx2 <- x7").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndefinedVariable("x7".into()));
        assert_eq!((err.line, err.column), (3, 7));
    }

    #[test]
    fn duplicate_update_line() {
        let err = parse_cbn("x1 <- true\nx1 <- x1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateUpdate(1));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn observed_out_of_range() {
        let err = parse_cbn("x1 <- true\nobserve x1 x3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ObservedOutOfRange(3));
        assert_eq!((err.line, err.column), (2, 12));
    }

    #[test]
    fn missing_update_line() {
        let err = parse_cbn("x1 <- true\nx3 <- x1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingUpdate(2));
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "x1 x2",
            "x1 <-",
            "y1 <- x1",
            "x0 <- true",
            "x1 <- x1\nobserve",
            "mode: xor\nx1 <- true",
        ] {
            let err = parse_cbn(bad).unwrap_err();
            assert!(
                matches!(err.kind, ParseErrorKind::Syntax(_)),
                "{bad}: {err}"
            );
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let cbn =
            parse_cbn("# header\n\nx1 <- true   # constant\n  \nobserve x1 # done\n").unwrap();
        assert_eq!(cbn.n(), 1);
        assert!(cbn.args(0).is_empty());
    }

    #[test]
    fn serialization_is_canonical() {
        let cbn = parse_cbn("x2 <- x2 x1\nobserve x2\nx1 <- true\nobserve x1 x2").unwrap();
        assert_eq!(
            serialize_cbn(&cbn),
            "x1 <- true\nx2 <- x1 x2\nobserve x1 x2\n"
        );
    }

    #[test]
    fn modes_and_inputs() {
        let doc = parse_document("mode: or\nx1 <- x1\nobserve x1").unwrap();
        assert_eq!(doc.connective, Connective::Or);
        assert!(doc.to_cbn().is_err());
        assert!(doc.to_dbn().is_ok());

        let doc = parse_document("input u1\nx1 <- u1 x2\nx2 <- u1\nobserve x1").unwrap();
        assert_eq!(doc.input_count, 1);
        let cbcn = doc.to_cbcn().unwrap();
        assert_eq!(cbcn.input_args(0), &[0]);
        assert_eq!(cbcn.state().args(0), &[1]);
        assert!(doc.to_cbn().is_err());

        let err = parse_document("x1 <- u1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndefinedInput("u1".into()));
    }

    #[test]
    fn general_outputs() {
        let doc = parse_document("x1 <- x2\nx2 <- x1 x2\noutput x1 x2").unwrap();
        let g = doc.to_general_output().unwrap();
        assert_eq!(g.outputs(), &[vec![0, 1]]);
        assert_eq!(parse_document(&doc.to_text()).unwrap(), doc);
    }
}
