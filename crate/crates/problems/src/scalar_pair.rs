//! The two-member scalar example with set-valued members: constant pieces
//! with a jump for the first member, slope-4 pieces for the second. Their
//! mean is `2x - 3` left of the breakpoint and `2x - 1` right of it, with
//! root exactly 1; the member elements at the root are +2 and -2.

use operator_core::{Operator, OperatorEnsemble, PiecewiseScalarOperator, Segment, Vector};

/// `A1 = {1} / [1,3] / {3}` and `A2 = {4x-7} / [-3,-1] / {4x-5}`, breakpoint
/// at 1, uniform weights, stored root `x* = 1`.
pub fn build_scalar_pair() -> OperatorEnsemble {
    let a1 = PiecewiseScalarOperator::new(
        vec![1.0],
        vec![Segment::new(0.0, 1.0), Segment::new(0.0, 3.0)],
    )
    .expect("constant pieces with an upward jump");
    let a2 = PiecewiseScalarOperator::new(
        vec![1.0],
        vec![Segment::new(4.0, -7.0), Segment::new(4.0, -5.0)],
    )
    .expect("parallel slope-4 pieces with an upward jump");
    let mut ens = OperatorEnsemble::new(vec![Operator::from(a1), Operator::from(a2)])
        .expect("two scalar members");
    ens.set_root(Vector::from_element(1, 1.0));
    ens
}
