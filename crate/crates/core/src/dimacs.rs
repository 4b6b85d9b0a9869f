//! DIMACS CNF and (pre-2022) MaxSAT-Evaluation WCNF reading and writing.
//!
//! Accepted inputs:
//!
//! - `p cnf <nv> <nc>`: every clause becomes a soft clause of weight 1.
//! - `p wcnf <nv> <nc> <top>`: clauses weighted `top` are hard.
//! - `p wcnf <nv> <nc>`: legacy header without top, every clause is soft.
//!
//! Each clause occupies one line and is terminated by `0`. The 2022 format
//! with `h`-prefixed hard clauses is rejected.

use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::formula::{checked_weight_sum, Clause, Lit, MaxSatSolution, Wcnf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Cnf,
    Wcnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject literals above the declared variable count, clause-count
    /// mismatches, and repeated literals in plain CNF lines.
    pub strict: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedInstance {
    pub format: Format,
    pub num_vars_declared: u32,
    pub num_clauses_declared: usize,
    /// `None` for CNF input and for legacy WCNF headers.
    pub top: Option<u64>,
    pub wcnf: Wcnf,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing problem line")]
    MissingHeader,
    #[error("malformed problem line: {0}")]
    MalformedHeader(String),
    #[error("duplicate problem line")]
    DuplicateHeader,
    #[error("expected a {expected} problem line")]
    WrongFormat { expected: &'static str },
    #[error("2022-style WCNF (h-prefixed hard clauses) is not supported")]
    UnsupportedFormat,
    #[error("not an integer: {0}")]
    NotAnInteger(String),
    #[error("clause is not terminated by 0")]
    MissingTerminator,
    #[error("unexpected token after terminating 0: {0}")]
    ExtraToken(String),
    #[error("repeated literal {0} in clause")]
    RepeatedLiteral(i64),
    #[error("clause weight is 0")]
    ZeroWeight,
    #[error("clause weight {weight} exceeds top {top}")]
    WeightAboveTop { weight: u64, top: u64 },
    #[error("variable {var} exceeds declared count {declared}")]
    VariableOutOfRange { var: u64, declared: u32 },
    #[error("declared {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

struct Header {
    format: Format,
    num_vars: u32,
    num_clauses: usize,
    top: Option<u64>,
}

fn parse_int<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| ParseError {
            line,
            kind: ParseErrorKind::NotAnInteger(tok.to_string()),
        })
}

fn parse_header(tokens: &[&str], line: usize) -> Result<Header, ParseError> {
    let malformed = || ParseError {
        line,
        kind: ParseErrorKind::MalformedHeader(tokens.join(" ")),
    };
    let num = |i: usize| -> Result<u64, ParseError> {
        tokens
            .get(i)
            .ok_or_else(malformed)?
            .parse::<u64>()
            .map_err(|_| malformed())
    };
    match tokens.get(1).copied() {
        Some("cnf") if tokens.len() == 4 => Ok(Header {
            format: Format::Cnf,
            num_vars: u32::try_from(num(2)?).map_err(|_| malformed())?,
            num_clauses: num(3)? as usize,
            top: None,
        }),
        Some("wcnf") if tokens.len() == 4 || tokens.len() == 5 => {
            let top = if tokens.len() == 5 {
                let t = num(4)?;
                if t == 0 {
                    return Err(malformed());
                }
                Some(t)
            } else {
                None
            };
            Ok(Header {
                format: Format::Wcnf,
                num_vars: u32::try_from(num(2)?).map_err(|_| malformed())?,
                num_clauses: num(3)? as usize,
                top,
            })
        }
        _ => Err(malformed()),
    }
}

/// Parses either format, dispatching on the problem line.
pub fn parse_auto<R: BufRead>(reader: R, opts: ParseOptions) -> Result<ParsedInstance, ParseError> {
    parse_dimacs(reader, opts, None)
}

/// Parses a WCNF instance; a `p cnf` header is an error.
pub fn parse_wcnf<R: BufRead>(reader: R, opts: ParseOptions) -> Result<ParsedInstance, ParseError> {
    parse_dimacs(reader, opts, Some(Format::Wcnf))
}

/// Parses a plain CNF instance as unit-weight MaxSAT.
pub fn parse_cnf<R: BufRead>(reader: R, opts: ParseOptions) -> Result<ParsedInstance, ParseError> {
    parse_dimacs(reader, opts, Some(Format::Cnf))
}

pub fn parse_str(text: &str, opts: ParseOptions) -> Result<ParsedInstance, ParseError> {
    parse_auto(text.as_bytes(), opts)
}

fn parse_dimacs<R: BufRead>(
    reader: R,
    opts: ParseOptions,
    expected: Option<Format>,
) -> Result<ParsedInstance, ParseError> {
    let mut header: Option<Header> = None;
    let mut wcnf = Wcnf::default();
    let mut found = 0usize;
    let mut last_line = 0usize;
    let mut max_var = 0u32;
    let mut lits: Vec<i64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| ParseError {
            line: lineno,
            kind: ParseErrorKind::Io(e.to_string()),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens[0] == "p" {
            if header.is_some() {
                return err(lineno, ParseErrorKind::DuplicateHeader);
            }
            let h = parse_header(&tokens, lineno)?;
            if let Some(want) = expected {
                if want != h.format {
                    let expected = match want {
                        Format::Cnf => "cnf",
                        Format::Wcnf => "wcnf",
                    };
                    return err(lineno, ParseErrorKind::WrongFormat { expected });
                }
            }
            wcnf.num_vars = h.num_vars;
            header = Some(h);
            continue;
        }
        if tokens[0] == "h" {
            return err(lineno, ParseErrorKind::UnsupportedFormat);
        }
        let Some(h) = header.as_ref() else {
            return err(lineno, ParseErrorKind::MissingHeader);
        };

        let mut rest = &tokens[..];
        let weight = if h.format == Format::Wcnf {
            let w: u64 = parse_int(tokens[0], lineno)?;
            rest = &tokens[1..];
            if w == 0 {
                return err(lineno, ParseErrorKind::ZeroWeight);
            }
            if let Some(top) = h.top {
                if w > top {
                    return err(lineno, ParseErrorKind::WeightAboveTop { weight: w, top });
                }
            }
            Some(w)
        } else {
            None
        };

        lits.clear();
        let mut terminated = false;
        for tok in rest {
            if terminated {
                return err(lineno, ParseErrorKind::ExtraToken(tok.to_string()));
            }
            let l: i64 = parse_int(tok, lineno)?;
            if l == 0 {
                terminated = true;
                continue;
            }
            let var = l.unsigned_abs();
            if var > u64::from(u32::MAX / 2) {
                return err(lineno, ParseErrorKind::NotAnInteger(tok.to_string()));
            }
            if var > u64::from(h.num_vars) && opts.strict {
                return err(
                    lineno,
                    ParseErrorKind::VariableOutOfRange {
                        var,
                        declared: h.num_vars,
                    },
                );
            }
            if h.format == Format::Cnf && opts.strict && lits.contains(&l) {
                return err(lineno, ParseErrorKind::RepeatedLiteral(l));
            }
            max_var = max_var.max(var as u32);
            lits.push(l);
        }
        if !terminated {
            return err(lineno, ParseErrorKind::MissingTerminator);
        }
        found += 1;
        let clause = Clause::new(lits.iter().map(|&l| Lit::from_dimacs(l)));
        match (weight, h.top) {
            (None, _) => wcnf.soft.push((clause, 1)),
            (Some(w), Some(top)) if w == top => wcnf.hard.push(clause),
            (Some(w), _) => wcnf.soft.push((clause, w)),
        }
    }

    let Some(h) = header else {
        return err(last_line.max(1), ParseErrorKind::MissingHeader);
    };
    let mut warnings = Vec::new();
    if found != h.num_clauses {
        if opts.strict {
            return err(
                last_line.max(1),
                ParseErrorKind::ClauseCount {
                    declared: h.num_clauses,
                    found,
                },
            );
        }
        warnings.push(format!(
            "declared {} clauses, found {found}",
            h.num_clauses
        ));
    }
    if max_var > h.num_vars {
        warnings.push(format!(
            "variables up to {max_var} used, {} declared",
            h.num_vars
        ));
    }
    wcnf.num_vars = h.num_vars.max(max_var);
    if let Some(top) = h.top {
        match checked_weight_sum(wcnf.soft.iter().map(|(_, w)| *w)) {
            Ok(sum) if sum < top => {}
            Ok(sum) => warnings.push(format!("top {top} does not exceed soft weight sum {sum}")),
            Err(_) => warnings.push(format!("soft weight sum overflows; top is {top}")),
        }
    }
    Ok(ParsedInstance {
        format: h.format,
        num_vars_declared: h.num_vars,
        num_clauses_declared: h.num_clauses,
        top: h.top,
        wcnf,
        warnings,
    })
}

fn push_clause(out: &mut String, weight: Option<u64>, clause: &Clause) {
    if let Some(w) = weight {
        let _ = write!(out, "{w} ");
    }
    for l in clause.iter() {
        let _ = write!(out, "{l} ");
    }
    out.push_str("0\n");
}

/// Canonical text of a parsed instance: header, hard clauses, soft clauses,
/// literals in ascending variable order. Comments are not preserved.
pub fn write_instance(inst: &ParsedInstance) -> String {
    let f = &inst.wcnf;
    let nv = inst.num_vars_declared.max(f.num_vars);
    let nc = f.hard.len() + f.soft.len();
    let mut out = String::new();
    match (inst.format, inst.top) {
        (Format::Cnf, _) => {
            let _ = writeln!(out, "p cnf {nv} {nc}");
            for (c, _) in &f.soft {
                push_clause(&mut out, None, c);
            }
        }
        (Format::Wcnf, Some(top)) => {
            let _ = writeln!(out, "p wcnf {nv} {nc} {top}");
            for c in &f.hard {
                push_clause(&mut out, Some(top), c);
            }
            for (c, w) in &f.soft {
                push_clause(&mut out, Some(*w), c);
            }
        }
        (Format::Wcnf, None) => {
            let _ = writeln!(out, "p wcnf {nv} {nc}");
            for (c, w) in &f.soft {
                push_clause(&mut out, Some(*w), c);
            }
        }
    }
    out
}

/// Writes `f` as WCNF with `top` set to one more than the soft weight sum.
pub fn write_wcnf(f: &Wcnf) -> crate::error::Result<String> {
    let top = f
        .total_soft_weight()?
        .checked_add(1)
        .ok_or(crate::error::Error::WeightOverflow)?;
    let inst = ParsedInstance {
        format: Format::Wcnf,
        num_vars_declared: f.num_vars,
        num_clauses_declared: f.hard.len() + f.soft.len(),
        top: Some(top),
        wcnf: f.clone(),
        warnings: Vec::new(),
    };
    Ok(write_instance(&inst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStatus {
    Optimum,
    HardUnsat,
    Unknown,
}

/// MaxSAT-Evaluation style output. `solution` is only read for
/// [`SolutionStatus::Optimum`].
pub fn write_solution(solution: Option<&MaxSatSolution>, status: SolutionStatus) -> String {
    let mut out = String::new();
    match (status, solution) {
        (SolutionStatus::Optimum, Some(sol)) => {
            let _ = writeln!(out, "o {}", sol.cost);
            out.push_str("s OPTIMUM FOUND\nv");
            for l in sol.model.to_dimacs() {
                let _ = write!(out, " {l}");
            }
            out.push_str(" 0\n");
        }
        (SolutionStatus::HardUnsat, _) => out.push_str("s UNSATISFIABLE\n"),
        _ => out.push_str("s UNKNOWN\n"),
    }
    out
}
