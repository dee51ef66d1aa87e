//! One iteration of each method. Every step comes in two forms: `*_apply`
//! takes the sampled outcomes (member index, coin) explicitly — that is the
//! transition kernel, also used to enumerate exact conditional expectations —
//! and `*_step` draws the outcomes from the generator and delegates.

use crate::{AlgorithmError, CallCounter, LsvrpState, PointSagaState, SamplerRng, SppmOcState, SppmState};
use operator_core::ResolventOracle;

/// `x' = (I + gamma*A_i)^-1(x)` — plain resolvent step on the sampled member.
pub fn sppm_apply(
    mut state: SppmState,
    oracle: &ResolventOracle,
    i: usize,
    counter: &mut CallCounter,
) -> Result<SppmState, AlgorithmError> {
    state.x = oracle.apply(i, &state.x)?;
    counter.add_member(1);
    state.k += 1;
    Ok(state)
}

pub fn sppm_step(
    state: SppmState,
    oracle: &ResolventOracle,
    rng: &mut SamplerRng,
    counter: &mut CallCounter,
) -> Result<SppmState, AlgorithmError> {
    let i = rng.draw_index(oracle.ensemble().weights());
    sppm_apply(state, oracle, i, counter)
}

/// Correction `h = a_i(x) - a_bar(x)` recomputed at the current point, then
/// `x' = (I + gamma*A_i)^-1(x + gamma*h)`. Cost: one member call plus one
/// full call.
pub fn sppm_oc_apply(
    mut state: SppmOcState,
    oracle: &ResolventOracle,
    i: usize,
    counter: &mut CallCounter,
) -> Result<SppmOcState, AlgorithmError> {
    let ens = oracle.ensemble();
    let a_i = ens.member(i).evaluate_element(&state.x)?;
    let a_bar = ens.mean_element(&state.x)?;
    let h = a_i - a_bar;
    let v = &state.x + oracle.gamma() * h;
    state.x = oracle.apply(i, &v)?;
    counter.add_member(1);
    counter.add_full(1);
    Ok(state)
}

pub fn sppm_oc_step(
    state: SppmOcState,
    oracle: &ResolventOracle,
    rng: &mut SamplerRng,
    counter: &mut CallCounter,
) -> Result<SppmOcState, AlgorithmError> {
    let i = rng.draw_index(oracle.ensemble().weights());
    sppm_oc_apply(state, oracle, i, counter)
}

/// Correction from the stored anchor element, then a resolvent step; on
/// heads the anchor snaps to the new iterate and the full element is
/// refreshed (one full call).
pub fn lsvrp_apply(
    mut state: LsvrpState,
    oracle: &ResolventOracle,
    i: usize,
    heads: bool,
    counter: &mut CallCounter,
) -> Result<LsvrpState, AlgorithmError> {
    let ens = oracle.ensemble();
    let a_i = ens.member(i).evaluate_element(&state.w)?;
    let h = a_i - &state.a_bar;
    let v = &state.x + oracle.gamma() * h;
    state.x = oracle.apply(i, &v)?;
    counter.add_member(1);
    if heads {
        state.w = state.x.clone();
        state.a_bar = ens.mean_element(&state.w)?;
        counter.add_full(1);
    }
    Ok(state)
}

pub fn lsvrp_step(
    state: LsvrpState,
    oracle: &ResolventOracle,
    p: f64,
    rng: &mut SamplerRng,
    counter: &mut CallCounter,
) -> Result<LsvrpState, AlgorithmError> {
    let i = rng.draw_index(oracle.ensemble().weights());
    let heads = rng.draw_coin(p);
    lsvrp_apply(state, oracle, i, heads, counter)
}

/// Correction from the sampled table entry, a resolvent step, then the free
/// recovery `e = (x - x')/gamma + h` of an element of `A_i(x')` — the table
/// and running mean are updated without any extra operator call.
pub fn point_saga_apply(
    mut state: PointSagaState,
    oracle: &ResolventOracle,
    i: usize,
    counter: &mut CallCounter,
) -> Result<PointSagaState, AlgorithmError> {
    let gamma = oracle.gamma();
    let h = &state.table[i] - &state.a_bar;
    let v = &state.x + gamma * &h;
    let x_next = oracle.apply(i, &v)?;
    counter.add_member(1);
    let e = (&state.x - &x_next) / gamma + h;
    let n = state.table.len() as f64;
    state.a_bar += (&e - &state.table[i]) / n;
    state.table[i] = e;
    if let Some(shadow) = &mut state.shadow_w {
        shadow[i] = x_next.clone();
    }
    state.x = x_next;
    Ok(state)
}

pub fn point_saga_step(
    state: PointSagaState,
    oracle: &ResolventOracle,
    rng: &mut SamplerRng,
    counter: &mut CallCounter,
) -> Result<PointSagaState, AlgorithmError> {
    let i = rng.draw_index(oracle.ensemble().weights());
    point_saga_apply(state, oracle, i, counter)
}
