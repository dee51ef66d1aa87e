//! Set-valued maximal monotone operators on the real line, given by affine
//! segments between breakpoints and the closed jump intervals connecting them.

use crate::OperatorError;

/// One affine piece `x -> slope*x + intercept` with `slope >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Maximal monotone operator on `R`: `segments[j]` is the single value on the
/// open interval between `breakpoints[j-1]` and `breakpoints[j]`, and at each
/// breakpoint the value is the full closed interval `[left limit, right
/// limit]` (maximality). With `k` breakpoints there are `k + 1` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseScalarOperator {
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
}

impl PiecewiseScalarOperator {
    /// Validates monotonicity of the graph at construction: nonnegative
    /// slopes, strictly increasing breakpoints, and left limit <= right limit
    /// at every breakpoint.
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Segment>) -> Result<Self, OperatorError> {
        if segments.len() != breakpoints.len() + 1 {
            return Err(OperatorError::NotMonotone(format!(
                "{} breakpoints require {} segments, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                segments.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite())
            || segments
                .iter()
                .any(|s| !s.slope.is_finite() || !s.intercept.is_finite())
        {
            return Err(OperatorError::NonFinite("piecewise operator data"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OperatorError::NotMonotone(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some(s) = segments.iter().find(|s| s.slope < 0.0) {
            return Err(OperatorError::NotMonotone(format!(
                "segment slope {} is negative",
                s.slope
            )));
        }
        for (j, &t) in breakpoints.iter().enumerate() {
            let left = segments[j].eval(t);
            let right = segments[j + 1].eval(t);
            if left > right {
                return Err(OperatorError::NotMonotone(format!(
                    "downward jump at breakpoint {t}: left limit {left} > right limit {right}"
                )));
            }
        }
        Ok(Self {
            breakpoints,
            segments,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Closed interval of operator values at `x` (degenerate off breakpoints).
    pub fn value_interval(&self, x: f64) -> (f64, f64) {
        if let Some(j) = self.breakpoints.iter().position(|&t| t == x) {
            (self.segments[j].eval(x), self.segments[j + 1].eval(x))
        } else {
            let v = self.segments[self.segment_index(x)].eval(x);
            (v, v)
        }
    }

    /// Canonical single-valued selection: segment value off breakpoints, the
    /// jump-interval midpoint at a breakpoint.
    pub fn evaluate(&self, x: f64) -> f64 {
        let (lo, hi) = self.value_interval(x);
        0.5 * (lo + hi)
    }

    /// Unique `x` with `v` in `x + gamma*A(x)`: inverts the strictly
    /// increasing map by locating `v` among the breakpoint jump images and
    /// the open segment images.
    pub fn resolvent(&self, gamma: f64, v: f64) -> f64 {
        for (j, &t) in self.breakpoints.iter().enumerate() {
            let lo_img = t + gamma * self.segments[j].eval(t);
            let hi_img = t + gamma * self.segments[j + 1].eval(t);
            if v < lo_img {
                // v falls in the image of segment j, left of this breakpoint.
                let s = self.segments[j];
                return (v - gamma * s.intercept) / (1.0 + gamma * s.slope);
            }
            if v <= hi_img {
                return t;
            }
        }
        let s = self.segments[self.segments.len() - 1];
        (v - gamma * s.intercept) / (1.0 + gamma * s.slope)
    }

    /// Index of the segment whose (half-)open interval contains `x`; at a
    /// breakpoint, the segment to its right.
    fn segment_index(&self, x: f64) -> usize {
        self.breakpoints.iter().filter(|&&t| t <= x).count()
    }
}
