//! Problem files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! # -((2 + cos(pi x)) u')' = 1 / (1 + x^2)
//! a = "2 + cos(pi*x)"
//! f = "1/(1+x^2)"
//! method = pcg
//! tol = 1e-10
//! ```

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use opkrylov::chebfun::DEFAULT_TOL;
use opkrylov::exprparse::{self, EvalError, Expr};
use opkrylov::krylov::Method;
use opkrylov::{construct_adaptive, BvpProblem, Error, KrylovOptions, OperatorContext, PiecewiseFun};

const KEYS: [&str; 12] = [
    "a",
    "b",
    "c",
    "f",
    "exact_solution",
    "breakpoints",
    "method",
    "tol",
    "max_iter",
    "restart",
    "v0_degree",
    "sample_count",
];

const DEFAULT_V0_DEGREE: usize = 20;
const DEFAULT_SAMPLE_COUNT: usize = 501;

/// A parsed and validated problem description.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub a: Expr,
    pub b: Option<Expr>,
    pub c: Option<Expr>,
    pub f: Option<Expr>,
    pub exact_solution: Option<Expr>,
    pub breakpoints: Option<Vec<f64>>,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: Option<usize>,
    pub v0_degree: Option<usize>,
    pub sample_count: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restart: Option<usize>,
    pub method: Option<Method>,
}

/// Strips a trailing comment, ignoring `#` inside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    for (i, ch) in line.char_indices() {
        match (quote, ch) {
            (None, '"' | '\'') => quote = Some(ch),
            (Some(q), _) if ch == q => quote = None,
            (None, '#') => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str) -> &str {
    for q in ['"', '\''] {
        if value.len() >= 2 && value.starts_with(q) && value.ends_with(q) {
            return &value[1..value.len() - 1];
        }
    }
    value
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected `key = value`"))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            bail!("line {lineno}: unknown key `{key}` (expected one of {})", KEYS.join(", "));
        }
        let value = unquote(value.trim()).trim().to_string();
        if value.is_empty() {
            bail!("line {lineno}: empty value for `{key}`");
        }
        if out.insert(key.to_string(), (lineno, value)).is_some() {
            bail!("line {lineno}: duplicate key `{key}`");
        }
    }
    Ok(out)
}

fn parse_breakpoints(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let bps = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("invalid breakpoint `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if bps.len() < 2 || bps[0] != -1.0 || *bps.last().unwrap() != 1.0 {
        bail!("breakpoints must start at -1 and end at 1");
    }
    if bps.windows(2).any(|w| w[1] <= w[0]) {
        bail!("breakpoints must be strictly increasing");
    }
    Ok(bps)
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let expr = |key: &str| -> Result<Option<Expr>> {
            entries
                .get(key)
                .map(|(line, v)| exprparse::parse(v).map_err(|e| anyhow!("line {line}: `{key}`: {e}")))
                .transpose()
        };
        fn number<T: std::str::FromStr>(
            entries: &BTreeMap<String, (usize, String)>,
            key: &str,
        ) -> Result<Option<T>>
        where
            T::Err: std::fmt::Display,
        {
            entries
                .get(key)
                .map(|(line, v)| v.parse::<T>().map_err(|e| anyhow!("line {line}: `{key}`: {e}")))
                .transpose()
        }

        let a = expr("a")?.ok_or_else(|| anyhow!("missing required key `a`"))?;
        let f = expr("f")?;
        let exact_solution = expr("exact_solution")?;
        if f.is_none() && exact_solution.is_none() {
            bail!("give `f`, or `exact_solution` to manufacture f");
        }
        let method = match entries.get("method") {
            Some((line, v)) => v.parse::<Method>().map_err(|e| anyhow!("line {line}: {e}"))?,
            None => Method::Pcg,
        };
        Ok(Self {
            a,
            b: expr("b")?,
            c: expr("c")?,
            f,
            exact_solution,
            breakpoints: entries.get("breakpoints").map(|(_, v)| parse_breakpoints(v)).transpose()?,
            method,
            tol: number(&entries, "tol")?.unwrap_or(KrylovOptions::default().tol),
            max_iter: number(&entries, "max_iter")?.unwrap_or(KrylovOptions::default().max_iter),
            restart: number(&entries, "restart")?,
            v0_degree: number(&entries, "v0_degree")?,
            sample_count: number(&entries, "sample_count")?.unwrap_or(DEFAULT_SAMPLE_COUNT),
        })
    }

    /// Applies command-line overrides and checks method-specific options.
    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        self.tol = o.tol.unwrap_or(self.tol);
        self.max_iter = o.max_iter.unwrap_or(self.max_iter);
        self.restart = o.restart.or(self.restart);
        self.method = o.method.unwrap_or(self.method);
        if self.restart.is_some() && self.method != Method::Gmres {
            bail!("restart invalid for {}", self.method);
        }
        if self.v0_degree.is_some() && self.method != Method::Cg {
            bail!("v0_degree invalid for {}", self.method);
        }
        if self.sample_count < 2 {
            bail!("sample_count must be at least 2");
        }
        self.options(None).validate()?;
        Ok(self)
    }

    pub fn v0_degree(&self) -> usize {
        self.v0_degree.unwrap_or(DEFAULT_V0_DEGREE)
    }

    pub fn options(&self, exact: Option<PiecewiseFun>) -> KrylovOptions {
        let mut o = KrylovOptions::default().with_tol(self.tol).with_max_iter(self.max_iter);
        if let Some(m) = self.restart {
            o = o.with_restart(m);
        }
        if let Some(u) = exact {
            o = o.with_exact(u);
        }
        o
    }

    fn breaks(&self) -> Vec<f64> {
        self.breakpoints.clone().unwrap_or_else(|| vec![-1.0, 1.0])
    }

    /// Resolves an expression as a piecewise Chebyshev function.
    fn function(&self, key: &str, e: &Expr) -> Result<PiecewiseFun> {
        let failure: RefCell<Option<EvalError>> = RefCell::new(None);
        let sampled = construct_adaptive(
            |x| {
                e.eval_at(x).unwrap_or_else(|err| {
                    failure.borrow_mut().get_or_insert(err);
                    f64::NAN
                })
            },
            &self.breaks(),
            DEFAULT_TOL,
        );
        if let Some(err) = failure.into_inner() {
            bail!("`{key}`: {err}");
        }
        match sampled {
            Ok(p) => Ok(p),
            Err(Error::Unresolved { .. }) if e.contains_nonsmooth() && self.breakpoints.is_none() => bail!(
                "`{key}` = {e} is not resolved: it uses abs or sign, so list its kinks under `breakpoints`"
            ),
            Err(err) => Err(anyhow!("`{key}`: {err}")),
        }
    }

    fn optional(&self, key: &str, e: &Option<Expr>) -> Result<PiecewiseFun> {
        match e {
            Some(e) if !e.is_zero() => self.function(key, e),
            _ => Ok(PiecewiseFun::zero()),
        }
    }

    /// Builds the operator context and, when given, the exact solution.
    /// A missing `f` is manufactured as `L` applied to the exact solution.
    pub fn build(&self) -> Result<(OperatorContext, Option<PiecewiseFun>)> {
        let a = self.function("a", &self.a)?;
        let b = self.optional("b", &self.b)?;
        let c = self.optional("c", &self.c)?;
        let exact = self
            .exact_solution
            .as_ref()
            .map(|e| self.function("exact_solution", e))
            .transpose()?;
        let f = match (&self.f, &exact) {
            (Some(f), _) => self.function("f", f)?,
            (None, Some(u)) => {
                let end = u.eval(-1.0).abs().max(u.eval(1.0).abs());
                if end > 1e-10 {
                    bail!("exact_solution must vanish at -1 and 1 (found {end:e})");
                }
                let placeholder = BvpProblem::new(a.clone(), b.clone(), c.clone(), PiecewiseFun::zero());
                OperatorContext::new(placeholder).apply_l(u)
            }
            (None, None) => unreachable!("checked in parse"),
        };
        Ok((OperatorContext::new(BvpProblem::new(a, b, c, f)), exact))
    }
}
