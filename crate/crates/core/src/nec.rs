//! Network-error-correcting code construction and verification.
//!
//! An additive error on edge `d` rides downstream exactly like a message
//! symbol injected at `d`. For every set `F` of `2a` candidate error
//! locations, extend each edge's global vector by the transfer
//! coefficients from `F`'s edges; the code corrects any `a`-edge error
//! precisely when, for every `F` and sink, the matrix of extended vectors
//! on a maximal disjoint path family is full rank. The construction keeps
//! all those rank witnesses invertible simultaneously, which is possible
//! deterministically once the field has more than `N * |F-family|`
//! elements.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::{Field, FieldElem};
use crate::graph::{insert_error_tap, EdgeId, Network, NodeId, TappedNetwork};
use crate::multicast::{propagate_bits, NetworkCode};
use crate::polymat::{inverse_bits, rank_bits};
use crate::{Error, Result};

/// Hard ceiling on the number of error-location subsets enumerated.
pub const ENUM_BUDGET: u128 = 1_000_000;

/// Derived parameters of an error-correcting run.
#[derive(Clone, Debug)]
pub struct NecParams {
    pub alpha: usize,
    /// Message dimension `k = h - 2*alpha`.
    pub k_msg: usize,
    /// Every `2*alpha`-subset of edge ids, in lexicographic order.
    pub family: Vec<Vec<EdgeId>>,
    pub field: Field,
}

impl NecParams {
    pub fn derive(net: &Network, alpha: usize, field: &Field) -> Result<NecParams> {
        let profile = net.validate()?;
        if profile.h < 2 * alpha + 1 {
            return Err(Error::AlphaInfeasible { alpha, h: profile.h });
        }
        let k_msg = profile.h - 2 * alpha;
        let family = enumerate_family(net.edge_count(), 2 * alpha)?;
        Ok(NecParams { alpha, k_msg, family, field: field.clone() })
    }
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn enumerate_family(edge_count: usize, size: usize) -> Result<Vec<Vec<EdgeId>>> {
    let count = binom(edge_count as u128, size as u128);
    if count > ENUM_BUDGET {
        return Err(Error::EnumerationBudget { count, budget: ENUM_BUDGET });
    }
    Ok((0..edge_count).combinations(size).collect())
}

/// One rank check: error-location set, sink, tap-path count, achieved rank.
#[derive(Clone, Debug, Serialize)]
pub struct RankWitness {
    #[serde(rename = "F")]
    pub f: Vec<EdgeId>,
    pub sink: String,
    pub m: usize,
    pub rank: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NecReport {
    pub k_msg: usize,
    pub alpha: usize,
    pub witnesses: Vec<RankWitness>,
    pub ok: bool,
}

/// How one sink's disjoint path family traverses the original edges.
#[derive(Clone, Debug)]
pub(crate) struct SinkPaths {
    /// Number of tap paths (`m_T^F <= 2*alpha`).
    pub m: usize,
    /// Message paths in input order; each is a list of original edge ids.
    pub message_paths: Vec<Vec<EdgeId>>,
    /// Tap paths by ascending origin edge; the origin is the tapped edge
    /// itself, where the error symbol enters.
    pub tap_paths: Vec<(EdgeId, Vec<EdgeId>)>,
}

impl SinkPaths {
    /// Terminal edges, message paths first then tap paths.
    pub fn terminals(&self) -> Vec<EdgeId> {
        self.message_paths
            .iter()
            .map(|p| *p.last().unwrap())
            .chain(self.tap_paths.iter().map(|(_, p)| *p.last().unwrap()))
            .collect()
    }
}

/// Finds, deterministically, the largest `m` such that `m` edge-disjoint
/// paths through the tapped midpoints plus `k` message paths through the
/// original source jointly reach the sink, then returns the family.
///
/// The tap side is throttled by a limiter arc of capacity `m`; the
/// message side is augmented afterwards on the residual network, which
/// may reroute tap paths in flight but never unseats a saturated tap.
pub(crate) fn sink_paths(
    tapped: &TappedNetwork,
    sink: NodeId,
    alpha: usize,
    k: usize,
) -> Result<SinkPaths> {
    let base_arcs: Vec<(NodeId, NodeId)> = tapped
        .net
        .edges()
        .iter()
        .map(|e| (e.tail, e.head))
        .collect();
    let limiter_node = tapped.net.node_count();
    let n_nodes = limiter_node + 1;
    let sprime = tapped.imaginary_source;

    let mut arcs = base_arcs;
    for &t in &tapped.tap_edges {
        arcs[t] = (limiter_node, arcs[t].1);
    }
    let limiter_arc = arcs.len();
    arcs.push((sprime, limiter_node));

    let upper = (2 * alpha).min(tapped.tap_edges.len());
    for m in (0..=upper).rev() {
        let mut caps = vec![1u32; arcs.len()];
        caps[limiter_arc] = m as u32;
        // phase 1: tap side only
        let mut blocked = caps.clone();
        for &me in &tapped.message_edges {
            blocked[me] = 0;
        }
        let (tap_flow_value, mut flow) =
            crate::graph::max_flow(n_nodes, &arcs, &blocked, sprime, sink, None);
        if tap_flow_value < m {
            continue;
        }
        // phase 2: open the message edges, push k more units
        let added = crate::graph::continue_max_flow(
            n_nodes, &arcs, &caps, &mut flow, sprime, sink, Some(k),
        );
        if added < k {
            continue;
        }
        let raw = crate::graph::decompose_paths(&arcs, &flow, sprime, sink);
        debug_assert_eq!(raw.len(), m + k);
        let mut message_paths: Vec<(usize, Vec<EdgeId>)> = Vec::new();
        let mut tap_paths: Vec<(EdgeId, Vec<EdgeId>)> = Vec::new();
        for p in raw {
            let first = p[0];
            if first == limiter_arc {
                // s' -> limiter -> midpoint -> second half of the origin
                let tap_arc = p[1];
                let pos = tapped.tap_edges.iter().position(|&x| x == tap_arc).unwrap();
                let origin = tapped.tapped[pos];
                let edges = arcs_to_original(&p[2..], tapped);
                debug_assert_eq!(edges.first(), Some(&origin));
                tap_paths.push((origin, edges));
            } else {
                let idx = tapped
                    .message_edges
                    .iter()
                    .position(|&x| x == first)
                    .expect("path leaves the imaginary source");
                message_paths.push((idx, arcs_to_original(&p[1..], tapped)));
            }
        }
        message_paths.sort_by_key(|(i, _)| *i);
        tap_paths.sort_by_key(|(origin, _)| *origin);
        return Ok(SinkPaths {
            m,
            message_paths: message_paths.into_iter().map(|(_, p)| p).collect(),
            tap_paths,
        });
    }
    // m = 0 requires only k disjoint source paths, which the mincut grants
    Err(Error::FlowInfeasible { requested: k, max: 0 })
}

/// Maps tapped-network arc ids back to original edge ids, dropping
/// imaginary arcs and merging split halves.
fn arcs_to_original(path: &[usize], tapped: &TappedNetwork) -> Vec<EdgeId> {
    let orig_count = tapped.net.edge_count()
        - 2 * tapped.tapped.len()
        - tapped.message_edges.len();
    let mut out = Vec::new();
    for &a in path {
        if a < orig_count {
            out.push(a);
        } else if let Some((&orig, _)) = tapped.split.iter().find(|&(_, &(_, s))| s == a) {
            // second half: collapses onto the original id unless the first
            // half is already recorded
            if out.last() != Some(&orig) {
                out.push(orig);
            }
        }
        // tap and message arcs are imaginary: skipped
    }
    out
}

/// Per-edge transfer coefficients from every potential error location:
/// `phi[e][d]` scales an error injected on `d` into the symbol of `e`.
pub(crate) fn error_transfer_bits(net: &Network, code: &NetworkCode) -> Result<Vec<Vec<u64>>> {
    let field = &code.field;
    let ecount = net.edge_count();
    let mut phi: Vec<Vec<u64>> = vec![Vec::new(); ecount];
    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let mut col = vec![0u64; ecount];
        if tail != net.source() {
            for &e_in in net.in_edges(tail) {
                let c = code
                    .local_coeffs
                    .get(&(e_in, e))
                    .ok_or(Error::MissingCoefficient { e_in, e_out: e })?;
                if c.is_zero() {
                    continue;
                }
                for (a, b) in col.iter_mut().zip(&phi[e_in]) {
                    *a = field.add_bits(*a, field.mul_bits(c.bits(), *b));
                }
            }
        }
        col[e] = field.add_bits(col[e], 1); // the error enters its own edge
        phi[e] = col;
    }
    Ok(phi)
}

/// Verifies that every rank witness `B_T^F` has full column rank
/// `k + m_T^F`.
pub fn verify_nec(net: &Network, code: &NetworkCode, alpha: usize) -> Result<NecReport> {
    let params = NecParams::derive(net, alpha, &code.field)?;
    let k = code.h_prime;
    let gev = propagate_bits(net, code)?;
    let phi = error_transfer_bits(net, code)?;
    let mut witnesses = Vec::new();
    let mut ok = true;
    for f_set in &params.family {
        let tapped = insert_error_tap(net, f_set, k)?;
        for (t_idx, &t) in net.sinks().iter().enumerate() {
            let _ = t_idx;
            let paths = sink_paths(&tapped, t, alpha, k)?;
            let terminals = paths.terminals();
            // rows: k message dims then 2*alpha error dims; columns: paths
            let matrix: Vec<Vec<u64>> = (0..k + 2 * alpha)
                .map(|r| {
                    terminals
                        .iter()
                        .map(|&e| {
                            if r < k {
                                gev[e][r]
                            } else {
                                phi[e][f_set[r - k]]
                            }
                        })
                        .collect()
                })
                .collect();
            let rank = rank_bits(&code.field, matrix);
            let want = k + paths.m;
            let this_ok = rank == want;
            ok &= this_ok;
            witnesses.push(RankWitness {
                f: f_set.clone(),
                sink: net.node_name(t).to_string(),
                m: paths.m,
                rank,
                ok: this_ok,
            });
        }
    }
    Ok(NecReport { k_msg: k, alpha, witnesses, ok })
}

/// Which input feeds a path edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Prev {
    /// Message input `i`, for the first edge of a message path.
    Virtual(usize),
    /// A real upstream edge.
    Edge(EdgeId),
}

/// A frontier column of one `(F, sink)` witness-in-progress.
#[derive(Clone, Copy, Debug)]
enum FCol {
    /// Message input `i` not yet entered: unit vector `u_i`.
    MsgInput(usize),
    /// Tap path whose origin has not been processed: unit `u_{k+pos}`
    /// where `pos` is the origin's position inside `F`.
    TapInput(usize),
    /// Latest processed edge of the path.
    Edge(EdgeId),
}

/// Constructs an `alpha`-error-correcting code meeting `k = h - 2*alpha`,
/// returning the code plus one rank witness per (error set, sink).
///
/// Deterministic greedy: edges are processed in topological order, and
/// each coefficient choice must keep every affected witness matrix at
/// full column rank. Such a choice always exists when
/// `q > N * C(|E|, 2*alpha)`; smaller fields run best-effort and fail
/// with the first uncoverable witness named.
pub fn construct_nec(
    net: &Network,
    alpha: usize,
    field: &Field,
    seed: u64,
) -> Result<(NetworkCode, Vec<RankWitness>)> {
    let params = NecParams::derive(net, alpha, field)?;
    let k = params.k_msg;
    let dim = k + 2 * alpha;

    // fixed path families per (F, sink)
    struct Job {
        f_pos: BTreeMap<EdgeId, usize>,
        sink: NodeId,
        cols: Vec<FCol>,
        /// users[edge] = (column, prev) for path edges
        steps: BTreeMap<EdgeId, Vec<(usize, Prev)>>,
    }
    let mut jobs: Vec<Job> = Vec::new();
    for f_set in &params.family {
        let tapped = insert_error_tap(net, f_set, k)?;
        let f_pos: BTreeMap<EdgeId, usize> =
            f_set.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        for &t in net.sinks() {
            let paths = sink_paths(&tapped, t, alpha, k)?;
            let mut cols = Vec::new();
            let mut steps: BTreeMap<EdgeId, Vec<(usize, Prev)>> = BTreeMap::new();
            for (i, p) in paths.message_paths.iter().enumerate() {
                let col = cols.len();
                cols.push(FCol::MsgInput(i));
                let mut prev = Prev::Virtual(i);
                for &e in p {
                    steps.entry(e).or_default().push((col, prev));
                    prev = Prev::Edge(e);
                }
            }
            for (origin, p) in &paths.tap_paths {
                let col = cols.len();
                cols.push(FCol::TapInput(f_pos[origin]));
                let mut prev: Option<Prev> = None; // origin edge injects
                for &e in p {
                    if let Some(pr) = prev {
                        steps.entry(e).or_default().push((col, pr));
                    } else {
                        steps.entry(e).or_default().push((col, Prev::Edge(e)));
                        // marker: self-prev means "origin step"
                    }
                    prev = Some(Prev::Edge(e));
                }
            }
            jobs.push(Job { f_pos: f_pos.clone(), sink: t, cols, steps });
        }
    }

    // evolving code state: global vectors and error transfer per edge
    let ecount = net.edge_count();
    let mut gev: Vec<Vec<u64>> = vec![Vec::new(); ecount];
    let mut phi: Vec<Vec<u64>> = vec![Vec::new(); ecount];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source_rows: BTreeMap<EdgeId, Vec<FieldElem>> = BTreeMap::new();
    let mut local_coeffs: BTreeMap<(EdgeId, EdgeId), FieldElem> = BTreeMap::new();

    // assembles the extended vector of a frontier column under a job's F
    let assemble = |col: &FCol, job: &Job, gev: &[Vec<u64>], phi: &[Vec<u64>]| -> Vec<u64> {
        let mut v = vec![0u64; dim];
        match col {
            FCol::MsgInput(i) => v[*i] = 1,
            FCol::TapInput(pos) => v[k + pos] = 1,
            FCol::Edge(e) => {
                v[..k].copy_from_slice(&gev[*e]);
                for (d, &pos) in &job.f_pos {
                    v[k + pos] = phi[*e][*d];
                }
            }
        }
        v
    };

    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let at_source = tail == net.source();

        // collect constraints across all jobs touching this edge
        struct Constraint {
            job: usize,
            col: usize,
            prev: Prev,
            origin: bool,
            dual: Vec<u64>,
            inj: Vec<u64>,
        }
        let mut constraints: Vec<Constraint> = Vec::new();
        let mut prev_keys: Vec<Prev> = Vec::new();
        for (j_idx, job) in jobs.iter().enumerate() {
            let Some(list) = job.steps.get(&e) else { continue };
            // dual vectors need the current frontier completed to a basis
            let frontier: Vec<Vec<u64>> = job
                .cols
                .iter()
                .map(|c| assemble(c, job, &gev, &phi))
                .collect();
            let duals = match witness_duals(field, &frontier, dim) {
                Some(d) => d,
                None => {
                    return Err(Error::Inconsistent(
                        "witness frontier lost full rank".into(),
                    ))
                }
            };
            for &(col, prev) in list {
                let origin = matches!(prev, Prev::Edge(pe) if pe == e);
                if !origin {
                    prev_keys.push(prev);
                }
                let inj = match job.f_pos.get(&e) {
                    Some(&pos) => {
                        let mut v = vec![0u64; dim];
                        v[k + pos] = 1;
                        v
                    }
                    None => vec![0u64; dim],
                };
                constraints.push(Constraint {
                    job: j_idx,
                    col,
                    prev,
                    origin,
                    dual: duals[col].clone(),
                    inj,
                });
            }
        }

        prev_keys.sort_unstable();
        prev_keys.dedup();

        let mut x: BTreeMap<Prev, u64> = prev_keys.iter().map(|&p| (p, 0)).collect();
        if !constraints.is_empty() {
            // satisfied origins first: at x = 0 their value is dual . inj,
            // which is nonzero because inj is the current frontier column
            constraints.sort_by_key(|c| (!c.origin, c.job, c.col));
            let dot = |a: &[u64], b: &[u64]| {
                a.iter()
                    .zip(b)
                    .fold(0u64, |acc, (&p, &q)| field.add_bits(acc, field.mul_bits(p, q)))
            };
            let prev_vec = |p: Prev, job: &Job| -> Vec<u64> {
                match p {
                    Prev::Virtual(i) => assemble(&FCol::MsgInput(i), job, &gev, &phi),
                    Prev::Edge(id) => assemble(&FCol::Edge(id), job, &gev, &phi),
                }
            };
            let eval = |c: &Constraint, x: &BTreeMap<Prev, u64>| -> u64 {
                let mut acc = dot(&c.dual, &c.inj);
                for (&p, &coeff) in x {
                    if coeff != 0 {
                        let w = prev_vec(p, &jobs[c.job]);
                        acc = field.add_bits(acc, field.mul_bits(coeff, dot(&c.dual, &w)));
                    }
                }
                acc
            };
            for idx in 0..constraints.len() {
                if eval(&constraints[idx], &x) != 0 {
                    continue;
                }
                let c = &constraints[idx];
                if c.origin {
                    // origins start satisfied and earlier fixes are vetted
                    // against them, so reaching this means a logic error
                    return Err(Error::Inconsistent(format!(
                        "origin constraint violated at edge {e}"
                    )));
                }
                let own = c.prev;
                let mut fixed = false;
                for cand in candidate_scan(&mut rng, field.size()) {
                    let saved = x[&own];
                    x.insert(own, cand);
                    if (0..=idx).all(|i| eval(&constraints[i], &x) != 0) {
                        fixed = true;
                        break;
                    }
                    x.insert(own, saved);
                }
                if !fixed {
                    let job = &jobs[c.job];
                    return Err(Error::SearchExhausted(format!(
                        "edge {e}: witness (F={:?}, sink {}) cannot stay full rank over \
                         GF({}); the guarantee needs q > {}",
                        job.f_pos.keys().collect::<Vec<_>>(),
                        net.node_name(job.sink),
                        field.size(),
                        net.sinks().len() as u128 * params.family.len() as u128,
                    )));
                }
            }
        }

        // freeze coefficients and update gev/phi for this edge
        let mut g = vec![0u64; k];
        let mut ph = vec![0u64; ecount];
        for (&p, &coeff) in &x {
            if coeff == 0 {
                continue;
            }
            match p {
                Prev::Virtual(i) => g[i] = field.add_bits(g[i], coeff),
                Prev::Edge(id) => {
                    for (a, b) in g.iter_mut().zip(&gev[id]) {
                        *a = field.add_bits(*a, field.mul_bits(coeff, *b));
                    }
                    for (a, b) in ph.iter_mut().zip(&phi[id]) {
                        *a = field.add_bits(*a, field.mul_bits(coeff, *b));
                    }
                }
            }
        }
        if at_source {
            if constraints.is_empty() {
                source_rows.insert(e, vec![field.zero(); k]);
            } else {
                let row = (0..k)
                    .map(|i| {
                        field
                            .elem(x.get(&Prev::Virtual(i)).copied().unwrap_or(0))
                            .expect("in range")
                    })
                    .collect();
                source_rows.insert(e, row);
            }
        } else {
            let ins = net.in_edges(tail);
            let forward_default = constraints.is_empty() && ins.len() == 1;
            for &e_in in ins {
                let bits = if forward_default {
                    1
                } else {
                    x.get(&Prev::Edge(e_in)).copied().unwrap_or(0)
                };
                local_coeffs.insert((e_in, e), field.elem(bits).expect("in range"));
                if forward_default {
                    for (a, b) in g.iter_mut().zip(&gev[e_in]) {
                        *a = field.add_bits(*a, *b);
                    }
                    for (a, b) in ph.iter_mut().zip(&phi[e_in]) {
                        *a = field.add_bits(*a, *b);
                    }
                }
            }
        }
        ph[e] = field.add_bits(ph[e], 1);
        gev[e] = g;
        phi[e] = ph;

        // advance frontiers
        for job in jobs.iter_mut() {
            if let Some(list) = job.steps.get(&e) {
                for &(col, _) in list {
                    job.cols[col] = FCol::Edge(e);
                }
            }
        }
    }

    let mut sink_selectors = Vec::new();
    for &t in net.sinks() {
        let paths = net.edge_disjoint_paths(net.source(), t, k)?;
        sink_selectors.push(paths.iter().map(|p| *p.last().unwrap()).collect());
    }
    let code = NetworkCode {
        field: field.clone(),
        h_prime: k,
        source_rows,
        local_coeffs,
        sink_selectors,
    };
    let report = verify_nec(net, &code, alpha)?;
    if !report.ok {
        return Err(Error::Inconsistent(
            "constructed error-correcting code failed re-verification".into(),
        ));
    }
    Ok((code, report.witnesses))
}

/// Randomized fallback construction: draw every coefficient uniformly,
/// verify, retry up to `retries` times.
pub fn construct_nec_randomized(
    net: &Network,
    alpha: usize,
    field: &Field,
    seed: u64,
    retries: usize,
) -> Result<(NetworkCode, Vec<RankWitness>)> {
    let params = NecParams::derive(net, alpha, field)?;
    let k = params.k_msg;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..retries.max(1) {
        let rows: BTreeMap<EdgeId, Vec<FieldElem>> = net
            .out_edges(net.source())
            .iter()
            .map(|&e| {
                let row = (0..k)
                    .map(|_| field.elem(rng.gen_range(0..field.size())).unwrap())
                    .collect();
                (e, row)
            })
            .collect();
        let mut overrides = Vec::new();
        for v in 0..net.node_count() {
            if v == net.source() {
                continue;
            }
            for &e_in in net.in_edges(v) {
                for &e_out in net.out_edges(v) {
                    overrides.push((
                        e_in,
                        e_out,
                        field.elem(rng.gen_range(0..field.size())).unwrap(),
                    ));
                }
            }
        }
        let code = NetworkCode::assemble(net, field, k, rows, &overrides, &field.zero())?;
        let report = verify_nec(net, &code, alpha)?;
        if report.ok {
            return Ok((code, report.witnesses));
        }
        last = Some(report);
    }
    let bad = last
        .and_then(|r| r.witnesses.into_iter().find(|w| !w.ok))
        .map(|w| format!("witness (F={:?}, sink {}) rank {} of {}", w.f, w.sink, w.rank, w.m))
        .unwrap_or_else(|| "no attempt recorded".into());
    Err(Error::SearchExhausted(format!(
        "randomized construction exhausted retries; last failure: {bad}"
    )))
}

/// Dual rows for a full-column-rank frontier: completes the columns to an
/// invertible square matrix with standard basis vectors, inverts, and
/// returns the rows matching the original columns (so
/// `dual_i . column_j = delta_ij`).
fn witness_duals(field: &Field, cols: &[Vec<u64>], dim: usize) -> Option<Vec<Vec<u64>>> {
    let mut full: Vec<Vec<u64>> = cols.to_vec();
    for b in 0..dim {
        if full.len() == dim {
            break;
        }
        let mut unit = vec![0u64; dim];
        unit[b] = 1;
        let mut trial = full.clone();
        trial.push(unit.clone());
        let rows: Vec<Vec<u64>> = (0..dim).map(|r| trial.iter().map(|c| c[r]).collect()).collect();
        if rank_bits(field, rows) == trial.len() {
            full.push(unit);
        }
    }
    if full.len() != dim {
        return None;
    }
    let matrix: Vec<Vec<u64>> = (0..dim).map(|r| full.iter().map(|c| c[r]).collect()).collect();
    let inv = inverse_bits(field, &matrix)?;
    Some(inv[..cols.len()].to_vec())
}

fn candidate_scan(rng: &mut ChaCha8Rng, q: u64) -> impl Iterator<Item = u64> {
    let start = rng.gen_range(0..q);
    let step = rng.gen_range(0..q / 2).wrapping_mul(2).wrapping_add(1) % q.max(1);
    (0..q).map(move |i| (start.wrapping_add(i.wrapping_mul(step))) % q)
}

/// Per-sink outcome of a decode attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded(Vec<FieldElem>),
    /// Distinct messages explain the observation equally well.
    Ambiguous,
}

/// Brute-force decoding: the sink observes its incoming symbols under
/// `message` plus `error`, then searches every (message', error') with
/// support at most `alpha` that explains the observation. It decodes
/// exactly when all explanations agree on the message.
pub fn decode_oracle(
    net: &Network,
    code: &NetworkCode,
    alpha: usize,
    message: &[FieldElem],
    error: &BTreeMap<EdgeId, FieldElem>,
    budget: u128,
) -> Result<Vec<DecodeOutcome>> {
    let k = code.h_prime;
    if message.len() != k {
        return Err(Error::Shape(format!(
            "message length {} does not match code dimension {k}",
            message.len()
        )));
    }
    let support: Vec<EdgeId> = error.keys().copied().collect();
    if support.len() > alpha {
        return Err(Error::InvalidArgument(format!(
            "error touches {} edges, alpha is {alpha}",
            support.len()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&e| e >= net.edge_count()) {
        return Err(Error::BadEdgeId(bad));
    }
    let q = code.field.size() as u128;
    let required = candidate_count(q, k, net.edge_count(), alpha);
    if required > budget {
        return Err(Error::DecodeBudget { required, budget });
    }

    let field = &code.field;
    let gev = propagate_bits(net, code)?;
    let phi = error_transfer_bits(net, code)?;
    let msg_bits: Vec<u64> = message.iter().map(|m| m.bits()).collect();
    let err_bits: Vec<(EdgeId, u64)> = error.iter().map(|(&e, v)| (e, v.bits())).collect();

    let observe = |t: NodeId, msg: &[u64], err: &[(EdgeId, u64)]| -> Vec<u64> {
        net.in_edges(t)
            .iter()
            .map(|&e| {
                let mut s = 0u64;
                for (i, &m) in msg.iter().enumerate() {
                    s = field.add_bits(s, field.mul_bits(m, gev[e][i]));
                }
                for &(d, z) in err {
                    s = field.add_bits(s, field.mul_bits(z, phi[e][d]));
                }
                s
            })
            .collect()
    };

    let mut outcomes = Vec::new();
    for &t in net.sinks() {
        let seen = observe(t, &msg_bits, &err_bits);
        let mut agreed: Option<Vec<u64>> = None;
        let mut ambiguous = false;
        for_each_candidate(field, k, net.edge_count(), alpha, |cand_msg, cand_err| {
            if ambiguous {
                return;
            }
            if observe(t, cand_msg, cand_err) == seen {
                match &agreed {
                    None => agreed = Some(cand_msg.to_vec()),
                    Some(prev) if prev == cand_msg => {}
                    Some(_) => ambiguous = true,
                }
            }
        });
        outcomes.push(if ambiguous {
            DecodeOutcome::Ambiguous
        } else {
            let m = agreed.expect("the true pair explains itself");
            DecodeOutcome::Decoded(
                m.into_iter().map(|b| field.elem(b).expect("in range")).collect(),
            )
        });
    }
    Ok(outcomes)
}

/// Exhaustive operational check: true at a sink exactly when every
/// reachable observation pins down a unique message, i.e. every
/// (message, error-of-support-at-most-alpha) pair decodes correctly.
pub fn decode_sweep(
    net: &Network,
    code: &NetworkCode,
    alpha: usize,
    budget: u128,
) -> Result<bool> {
    let k = code.h_prime;
    let q = code.field.size() as u128;
    let required = candidate_count(q, k, net.edge_count(), alpha);
    if required > budget {
        return Err(Error::DecodeBudget { required, budget });
    }
    let field = &code.field;
    let gev = propagate_bits(net, code)?;
    let phi = error_transfer_bits(net, code)?;
    for &t in net.sinks() {
        let ins = net.in_edges(t);
        let mut table: std::collections::HashMap<Vec<u64>, Vec<u64>> =
            std::collections::HashMap::new();
        let mut clash = false;
        for_each_candidate(field, k, net.edge_count(), alpha, |msg, err| {
            if clash {
                return;
            }
            let obs: Vec<u64> = ins
                .iter()
                .map(|&e| {
                    let mut s = 0u64;
                    for (i, &m) in msg.iter().enumerate() {
                        s = field.add_bits(s, field.mul_bits(m, gev[e][i]));
                    }
                    for &(d, z) in err {
                        s = field.add_bits(s, field.mul_bits(z, phi[e][d]));
                    }
                    s
                })
                .collect();
            match table.get(&obs) {
                None => {
                    table.insert(obs, msg.to_vec());
                }
                Some(prev) if prev == msg => {}
                Some(_) => clash = true,
            }
        });
        if clash {
            return Ok(false);
        }
    }
    Ok(true)
}

fn candidate_count(q: u128, k: usize, edges: usize, alpha: usize) -> u128 {
    let mut patterns: u128 = 1;
    for j in 1..=alpha {
        patterns = patterns.saturating_add(
            binom(edges as u128, j as u128).saturating_mul((q - 1).saturating_pow(j as u32)),
        );
    }
    q.saturating_pow(k as u32).saturating_mul(patterns)
}

/// Enumerates every (message, sparse error) candidate pair in a fixed
/// order and feeds them to `visit`.
fn for_each_candidate(
    field: &Field,
    k: usize,
    edges: usize,
    alpha: usize,
    mut visit: impl FnMut(&[u64], &[(EdgeId, u64)]),
) {
    let q = field.size();
    let mut msg = vec![0u64; k];
    loop {
        // errors of support 0..=alpha on this message
        visit(&msg, &[]);
        let mut stack: Vec<(EdgeId, u64)> = Vec::new();
        enumerate_errors(q, edges, alpha, 0, &mut stack, &mut |err| visit(&msg, err));
        // next message, odometer style
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            msg[i] += 1;
            if msg[i] < q {
                break;
            }
            msg[i] = 0;
            i += 1;
        }
    }
}

fn enumerate_errors(
    q: u64,
    edges: usize,
    alpha: usize,
    from: EdgeId,
    stack: &mut Vec<(EdgeId, u64)>,
    visit: &mut impl FnMut(&[(EdgeId, u64)]),
) {
    if stack.len() == alpha {
        return;
    }
    for e in from..edges {
        for z in 1..q {
            stack.push((e, z));
            visit(stack);
            enumerate_errors(q, edges, alpha, e + 1, stack, visit);
            stack.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_combination_network;

    fn parallel_net(n: usize) -> Network {
        let mut text = String::from("node s\nnode t\n");
        for i in 0..n {
            text.push_str(&format!("edge {i} s t\n"));
        }
        text.push_str("source s\nsink t\n");
        Network::parse(&text).unwrap()
    }

    fn gf(k: usize, m: &str) -> Field {
        Field::new(k, m.parse().unwrap()).unwrap()
    }

    #[test]
    fn params_enforce_singleton_bound() {
        let net = parallel_net(3);
        let f = gf(2, "X^2+X+1");
        let p = NecParams::derive(&net, 1, &f).unwrap();
        assert_eq!(p.k_msg, 1);
        assert_eq!(p.family.len(), 3); // C(3,2)
        assert!(matches!(
            NecParams::derive(&net, 2, &f),
            Err(Error::AlphaInfeasible { alpha: 2, h: 3 })
        ));
    }

    #[test]
    fn construct_on_three_parallel_edges() {
        let net = parallel_net(3);
        let f = gf(2, "X^2+X+1");
        let (code, witnesses) = construct_nec(&net, 1, &f, 3).unwrap();
        assert_eq!(code.h_prime, 1);
        assert_eq!(witnesses.len(), 3);
        assert!(witnesses.iter().all(|w| w.ok));
        assert!(witnesses.iter().all(|w| w.m <= 2));
        // operationally: every single-edge error is corrected
        assert!(decode_sweep(&net, &code, 1, 1 << 20).unwrap());
    }

    #[test]
    fn alpha_zero_degenerates_to_multicast() {
        let net = gen_combination_network(4, 2).unwrap();
        let f = gf(3, "X^3+X+1");
        let (code, witnesses) = construct_nec(&net, 0, &f, 5).unwrap();
        assert_eq!(code.h_prime, 2);
        // one witness per sink, for the empty error set
        assert_eq!(witnesses.len(), net.sinks().len());
        assert!(witnesses.iter().all(|w| w.f.is_empty() && w.m == 0 && w.ok));
        assert!(crate::multicast::verify_multicast(&net, &code).unwrap().ok);
    }

    #[test]
    fn verify_flags_zeroed_row() {
        let net = parallel_net(3);
        let f = gf(2, "X^2+X+1");
        let (mut code, _) = construct_nec(&net, 1, &f, 3).unwrap();
        code.source_rows.insert(0, vec![f.zero()]);
        let report = verify_nec(&net, &code, 1).unwrap();
        assert!(!report.ok);
        let bad = report.witnesses.iter().find(|w| !w.ok).unwrap();
        assert_eq!(bad.sink, "t");
        // the operational oracle agrees something is broken
        assert!(!decode_sweep(&net, &code, 1, 1 << 20).unwrap());
    }

    #[test]
    fn decode_oracle_on_clean_and_corrupted_symbols() {
        let net = parallel_net(3);
        let f = gf(2, "X^2+X+1");
        let (code, _) = construct_nec(&net, 1, &f, 3).unwrap();
        for msg_bits in 0..4u64 {
            let msg = vec![f.elem(msg_bits).unwrap()];
            // zero error decodes
            let out = decode_oracle(&net, &code, 1, &msg, &BTreeMap::new(), 1 << 20).unwrap();
            assert_eq!(out, vec![DecodeOutcome::Decoded(msg.clone())]);
            // any single-edge error decodes
            for e in 0..3 {
                for z in 1..4u64 {
                    let err: BTreeMap<EdgeId, FieldElem> =
                        [(e, f.elem(z).unwrap())].into_iter().collect();
                    let out = decode_oracle(&net, &code, 1, &msg, &err, 1 << 20).unwrap();
                    assert_eq!(out, vec![DecodeOutcome::Decoded(msg.clone())], "e={e} z={z}");
                }
            }
        }
        // a two-edge error exceeds the designed capability; ambiguity is
        // acceptable, a crash is not
        let err: BTreeMap<EdgeId, FieldElem> = [
            (0, f.one()),
            (1, f.from_power(1)),
        ]
        .into_iter()
        .collect();
        assert!(matches!(
            decode_oracle(&net, &code, 1, &[f.one()], &err, 1 << 20),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn decode_budget_guard() {
        let net = parallel_net(3);
        let f = gf(2, "X^2+X+1");
        let (code, _) = construct_nec(&net, 1, &f, 3).unwrap();
        assert!(matches!(
            decode_sweep(&net, &code, 1, 10),
            Err(Error::DecodeBudget { .. })
        ));
    }

    #[test]
    fn randomized_construction_works() {
        let net = parallel_net(3);
        let f = gf(3, "X^3+X+1");
        let (code, witnesses) = construct_nec_randomized(&net, 1, &f, 11, 64).unwrap();
        assert!(witnesses.iter().all(|w| w.ok));
        assert!(decode_sweep(&net, &code, 1, 1 << 20).unwrap());
    }

    #[test]
    fn construct_on_two_sink_network() {
        // two sinks fed through shared relays: 8 edges, h = 3
        let net = Network::parse(
            "node s\nnode a\nnode b\nnode c\nnode t1\nnode t2\n\
             edge 0 s a\nedge 1 s b\nedge 2 s c\n\
             edge 3 a t1\nedge 4 b t1\nedge 5 c t1\n\
             edge 6 a t2\nedge 7 b t2\n\
             source s\nsink t1\n",
        )
        .unwrap();
        // t2 has mincut 2 < 3 so leave it out of the sink set above;
        // single sink keeps h = 3 and the family over 8 edges
        let f = gf(5, "X^5+X^2+1");
        let (code, witnesses) = construct_nec(&net, 1, &f, 9).unwrap();
        assert_eq!(witnesses.len(), 28); // C(8,2)
        assert!(witnesses.iter().all(|w| w.ok));
        assert!(decode_sweep(&net, &code, 1, 1 << 24).unwrap());
    }
}
