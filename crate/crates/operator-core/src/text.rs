//! Plain-text interchange format for ensembles. Versioned, whitespace-token
//! based, and float-exact: every value is printed with 17 significant digits,
//! which round-trips `f64` bit for bit.

use crate::{
    check_finite_vec, AffineOperator, Matrix, Operator, OperatorEnsemble, OperatorError,
    PiecewiseScalarOperator, Segment, ShiftedScalingOperator, Vector,
};
use std::fmt::Write as _;

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            iter: s.split_whitespace(),
            consumed: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str, OperatorError> {
        self.consumed += 1;
        self.iter
            .next()
            .ok_or_else(|| OperatorError::Parse("unexpected end of document".into()))
    }

    fn peek(&self) -> Option<&'a str> {
        self.iter.clone().next()
    }

    fn expect(&mut self, keyword: &str) -> Result<(), OperatorError> {
        let tok = self.next()?;
        if tok == keyword {
            Ok(())
        } else {
            Err(OperatorError::Parse(format!(
                "expected `{keyword}`, found `{tok}` (token {})",
                self.consumed
            )))
        }
    }

    fn f64(&mut self) -> Result<f64, OperatorError> {
        let tok = self.next()?;
        tok.parse::<f64>()
            .map_err(|_| OperatorError::Parse(format!("`{tok}` is not a float")))
    }

    fn usize(&mut self) -> Result<usize, OperatorError> {
        let tok = self.next()?;
        tok.parse::<usize>()
            .map_err(|_| OperatorError::Parse(format!("`{tok}` is not a count")))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>, OperatorError> {
        (0..count).map(|_| self.f64()).collect()
    }

    fn finish(mut self) -> Result<(), OperatorError> {
        match self.iter.next() {
            None => Ok(()),
            Some(tok) => Err(OperatorError::Parse(format!(
                "trailing content starting at `{tok}`"
            ))),
        }
    }
}

fn write_floats(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for (j, x) in values.into_iter().enumerate() {
        if j > 0 {
            out.push(' ');
        }
        out.push_str(&fmt_f64(x));
    }
    out.push('\n');
}

impl OperatorEnsemble {
    /// Serializes to the versioned interchange document.
    pub fn to_text(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        out.push_str("ensemble v1\n");
        let _ = writeln!(out, "dim {d}");
        let _ = writeln!(out, "members {}", self.len());
        out.push_str("weights ");
        write_floats(&mut out, self.weights().iter().copied());
        if let Some(root) = self.stored_root() {
            out.push_str("root ");
            write_floats(&mut out, root.iter().copied());
        }
        for op in self.members() {
            match op {
                Operator::Affine(a) => {
                    out.push_str("member affine\n");
                    for i in 0..d {
                        write_floats(&mut out, (0..d).map(|j| a.linear_part()[(i, j)]));
                    }
                    write_floats(&mut out, a.offset().iter().copied());
                }
                Operator::PiecewiseScalar(p) => {
                    let _ = writeln!(out, "member piecewise {}", p.breakpoints().len());
                    write_floats(&mut out, p.breakpoints().iter().copied());
                    for s in p.segments() {
                        write_floats(&mut out, [s.slope, s.intercept]);
                    }
                }
                Operator::ShiftedScaling(s) => {
                    out.push_str("member shifted\n");
                    let _ = writeln!(out, "{}", fmt_f64(s.mu()));
                    write_floats(&mut out, s.center().iter().copied());
                    write_floats(&mut out, s.offset().iter().copied());
                }
            }
        }
        out
    }

    /// Parses a document produced by [`to_text`](Self::to_text). All
    /// constructor invariants are re-validated.
    pub fn from_text(text: &str) -> Result<Self, OperatorError> {
        let mut t = Tokens::new(text);
        t.expect("ensemble")?;
        let version = t.next()?;
        if version != "v1" {
            return Err(OperatorError::Parse(format!(
                "unsupported format version `{version}`"
            )));
        }
        t.expect("dim")?;
        let d = t.usize()?;
        t.expect("members")?;
        let n = t.usize()?;
        if d == 0 || n == 0 {
            return Err(OperatorError::Parse("dim and members must be positive".into()));
        }
        t.expect("weights")?;
        let weights = t.floats(n)?;
        let root = if t.peek() == Some("root") {
            t.expect("root")?;
            let r = Vector::from_vec(t.floats(d)?);
            check_finite_vec(&r, "root")?;
            Some(r)
        } else {
            None
        };
        let mut members = Vec::with_capacity(n);
        for _ in 0..n {
            t.expect("member")?;
            let kind = t.next()?;
            let op = match kind {
                "affine" => {
                    let b = Matrix::from_row_iterator(d, d, t.floats(d * d)?);
                    let r = Vector::from_vec(t.floats(d)?);
                    Operator::Affine(AffineOperator::new(b, r)?)
                }
                "piecewise" => {
                    if d != 1 {
                        return Err(OperatorError::Parse(
                            "piecewise member in a document with dim != 1".into(),
                        ));
                    }
                    let k = t.usize()?;
                    let breakpoints = t.floats(k)?;
                    let segments = (0..=k)
                        .map(|_| Ok(Segment::new(t.f64()?, t.f64()?)))
                        .collect::<Result<Vec<_>, OperatorError>>()?;
                    Operator::PiecewiseScalar(PiecewiseScalarOperator::new(
                        breakpoints,
                        segments,
                    )?)
                }
                "shifted" => {
                    let mu = t.f64()?;
                    let center = Vector::from_vec(t.floats(d)?);
                    let offset = Vector::from_vec(t.floats(d)?);
                    Operator::ShiftedScaling(ShiftedScalingOperator::new(mu, center, offset)?)
                }
                other => {
                    return Err(OperatorError::Parse(format!(
                        "unknown member kind `{other}`"
                    )))
                }
            };
            if op.dim() != d {
                return Err(OperatorError::Parse(format!(
                    "member dimension {} does not match document dim {d}",
                    op.dim()
                )));
            }
            members.push(op);
        }
        t.finish()?;
        let mut ens = OperatorEnsemble::with_weights(members, weights)?;
        if let Some(r) = root {
            ens.set_root(r);
        }
        Ok(ens)
    }
}
