//! Local encoding coefficients, global vectors and transfer matrices.
//!
//! A code fixes the three matrix families of the model: `A` (source rows,
//! sparse over the source's out-edges), `F` (local coefficients on
//! adjacent edge pairs) and `D_T` (per-sink 0/1 column selectors).
//! Propagation in topological edge order computes the global encoding
//! vector of every edge; a sink decodes exactly when the matrix of its
//! selected columns is invertible.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, FieldElem};
use crate::graph::{EdgeId, Network};
use crate::polymat::{inverse_bits, rank_bits};
use crate::{Error, Result};

/// A scalar linear network code over one field.
#[derive(Clone, Debug)]
pub struct NetworkCode {
    pub field: Field,
    /// Dimension: number of symbols multicast per generation.
    pub h_prime: usize,
    /// Row assignment of matrix `A`: one length-`h_prime` vector per
    /// source out-edge.
    pub source_rows: BTreeMap<EdgeId, Vec<FieldElem>>,
    /// Matrix `F` entries: coefficient applied to the symbol of `e_in`
    /// when forming the symbol of `e_out`, for adjacent pairs.
    pub local_coeffs: BTreeMap<(EdgeId, EdgeId), FieldElem>,
    /// Matrix `D_T` patterns: the `h_prime` incoming edges each sink
    /// decodes from, in sink order.
    pub sink_selectors: Vec<Vec<EdgeId>>,
}

impl NetworkCode {
    /// Assembles a code from explicit source rows plus local coefficient
    /// overrides; every other adjacent pair gets `default_coeff`. Sink
    /// selectors are the terminal edges of deterministically chosen
    /// disjoint path families.
    pub fn assemble(
        net: &Network,
        field: &Field,
        h_prime: usize,
        source_rows: BTreeMap<EdgeId, Vec<FieldElem>>,
        overrides: &[(EdgeId, EdgeId, FieldElem)],
        default_coeff: &FieldElem,
    ) -> Result<NetworkCode> {
        for &e in net.out_edges(net.source()) {
            let row = source_rows.get(&e).ok_or(Error::MissingSourceRow(e))?;
            if row.len() != h_prime {
                return Err(Error::Shape(format!(
                    "source row for edge {e} has length {}, expected {h_prime}",
                    row.len()
                )));
            }
        }
        let mut local_coeffs = BTreeMap::new();
        for v in 0..net.node_count() {
            if v == net.source() {
                continue;
            }
            for &e_in in net.in_edges(v) {
                for &e_out in net.out_edges(v) {
                    local_coeffs.insert((e_in, e_out), default_coeff.clone());
                }
            }
        }
        for (e_in, e_out, c) in overrides {
            if !local_coeffs.contains_key(&(*e_in, *e_out)) {
                return Err(Error::InvalidArgument(format!(
                    "edges {e_in} and {e_out} are not an adjacent pair"
                )));
            }
            local_coeffs.insert((*e_in, *e_out), c.clone());
        }
        let mut sink_selectors = Vec::new();
        for &t in net.sinks() {
            let paths = net.edge_disjoint_paths(net.source(), t, h_prime)?;
            sink_selectors.push(paths.iter().map(|p| *p.last().unwrap()).collect());
        }
        Ok(NetworkCode {
            field: field.clone(),
            h_prime,
            source_rows,
            local_coeffs,
            sink_selectors,
        })
    }

    fn check_fields(&self) -> Result<()> {
        let all = self
            .source_rows
            .values()
            .flatten()
            .chain(self.local_coeffs.values());
        for e in all {
            if e.field() != &self.field {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(())
    }
}

/// Global encoding vectors, indexed by edge id.
#[derive(Clone, Debug)]
pub struct GlobalVectors {
    pub vectors: Vec<Vec<FieldElem>>,
}

/// Propagates vectors in topological edge order: a source out-edge takes
/// its `A` row; every other edge takes the coefficient-weighted sum of
/// its tail's incoming vectors.
pub fn propagate(net: &Network, code: &NetworkCode) -> Result<GlobalVectors> {
    let bits = propagate_bits(net, code)?;
    let vectors = bits
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|b| code.field.elem(b).expect("residues stay in range"))
                .collect()
        })
        .collect();
    Ok(GlobalVectors { vectors })
}

pub(crate) fn propagate_bits(net: &Network, code: &NetworkCode) -> Result<Vec<Vec<u64>>> {
    code.check_fields()?;
    let field = &code.field;
    let mut vecs: Vec<Option<Vec<u64>>> = vec![None; net.edge_count()];
    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let v = if tail == net.source() {
            let row = code.source_rows.get(&e).ok_or(Error::MissingSourceRow(e))?;
            row.iter().map(|x| x.bits()).collect()
        } else {
            let mut acc = vec![0u64; code.h_prime];
            for &e_in in net.in_edges(tail) {
                let c = code
                    .local_coeffs
                    .get(&(e_in, e))
                    .ok_or(Error::MissingCoefficient { e_in, e_out: e })?;
                if c.is_zero() {
                    continue;
                }
                let w = vecs[e_in].as_ref().expect("topological order");
                for (a, b) in acc.iter_mut().zip(w) {
                    *a = field.add_bits(*a, field.mul_bits(c.bits(), *b));
                }
            }
            acc
        };
        vecs[e] = Some(v);
    }
    Ok(vecs.into_iter().map(|v| v.unwrap()).collect())
}

/// The transfer matrix of one sink (by position in the sink list):
/// columns are the global vectors of the selected incoming edges.
pub fn transfer_matrix(
    net: &Network,
    code: &NetworkCode,
    gv: &GlobalVectors,
    sink_index: usize,
) -> Result<Vec<Vec<FieldElem>>> {
    let selector = code
        .sink_selectors
        .get(sink_index)
        .ok_or_else(|| Error::InvalidArgument(format!("no sink at index {sink_index}")))?;
    let sink = net.sinks()[sink_index];
    if let Some(&bad) = selector.iter().find(|&&e| !net.in_edges(sink).contains(&e)) {
        return Err(Error::InvalidCode(format!(
            "edge {bad} is not incoming at sink {}",
            net.node_name(sink)
        )));
    }
    let mut m = vec![Vec::with_capacity(selector.len()); code.h_prime];
    for &e in selector {
        let col = gv
            .vectors
            .get(e)
            .ok_or(Error::BadEdgeId(e))?;
        for (r, x) in col.iter().enumerate() {
            m[r].push(x.clone());
        }
    }
    Ok(m)
}

/// Per-sink outcome of a multicast verification.
#[derive(Clone, Debug)]
pub struct SinkCheck {
    pub sink: String,
    pub rank: usize,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct MulticastReport {
    pub per_sink: Vec<SinkCheck>,
    pub ok: bool,
}

/// Ranks every sink's transfer matrix; `ok` when all have full rank.
pub fn verify_multicast(net: &Network, code: &NetworkCode) -> Result<MulticastReport> {
    if code.sink_selectors.len() != net.sinks().len() {
        return Err(Error::InvalidCode(format!(
            "{} sink selectors for {} sinks",
            code.sink_selectors.len(),
            net.sinks().len()
        )));
    }
    for (idx, &t) in net.sinks().iter().enumerate() {
        let sel = &code.sink_selectors[idx];
        if sel.len() != code.h_prime {
            return Err(Error::InvalidCode(format!(
                "selector for sink {} has {} edges, expected {}",
                net.node_name(t),
                sel.len(),
                code.h_prime
            )));
        }
        if let Some(&bad) = sel.iter().find(|&&e| !net.in_edges(t).contains(&e)) {
            return Err(Error::InvalidCode(format!(
                "edge {bad} is not incoming at sink {}",
                net.node_name(t)
            )));
        }
    }
    let bits = propagate_bits(net, code)?;
    let mut per_sink = Vec::new();
    let mut ok = true;
    for (idx, &t) in net.sinks().iter().enumerate() {
        let sel = &code.sink_selectors[idx];
        let matrix: Vec<Vec<u64>> = (0..code.h_prime)
            .map(|r| sel.iter().map(|&e| bits[e][r]).collect())
            .collect();
        let rank = rank_bits(&code.field, matrix);
        let sink_ok = rank == code.h_prime;
        ok &= sink_ok;
        per_sink.push(SinkCheck {
            sink: net.node_name(t).to_string(),
            rank,
            ok: sink_ok,
        });
    }
    Ok(MulticastReport { per_sink, ok })
}

/// Which predecessor feeds a path edge: a virtual unit-vector input at
/// the source, or a real upstream edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Prev {
    Virtual(usize),
    Edge(EdgeId),
}

/// Flow-based deterministic multicast construction.
///
/// Per sink, a family of `h_prime` edge-disjoint paths is fixed; each
/// sink's "frontier" (the latest edge per path, initially virtual unit
/// inputs) always carries linearly independent vectors. Edges are
/// processed in topological order and receive coefficients, over their
/// path predecessors only, that keep every affected frontier invertible.
/// A choice always exists while the field has more than `N` elements;
/// candidates are scanned in a pseudo-random order derived from `seed`.
pub fn construct_multicast(
    net: &Network,
    h_prime: usize,
    field: &Field,
    seed: u64,
) -> Result<NetworkCode> {
    let profile = net.validate()?;
    if h_prime > profile.h {
        return Err(Error::DimensionTooLarge { h_prime, h: profile.h });
    }
    let n_sinks = net.sinks().len();
    if field.size() <= n_sinks as u64 {
        return Err(Error::FieldTooSmall { q: field.size(), bound: n_sinks as u64 });
    }

    // fixed path families and the prev relation along them
    let mut paths_per_sink = Vec::with_capacity(n_sinks);
    for &t in net.sinks() {
        paths_per_sink.push(net.edge_disjoint_paths(net.source(), t, h_prime)?);
    }
    // users[e] = (sink, path index, predecessor)
    let mut users: Vec<Vec<(usize, usize, Prev)>> = vec![Vec::new(); net.edge_count()];
    for (s_idx, paths) in paths_per_sink.iter().enumerate() {
        for (p_idx, path) in paths.iter().enumerate() {
            let mut prev = Prev::Virtual(p_idx);
            for &e in path {
                users[e].push((s_idx, p_idx, prev));
                prev = Prev::Edge(e);
            }
        }
    }

    // frontier vectors per sink per path, as bit vectors of length h'
    let unit = |i: usize| -> Vec<u64> {
        let mut v = vec![0u64; h_prime];
        v[i] = 1;
        v
    };
    let mut frontier: Vec<Vec<Vec<u64>>> =
        vec![(0..h_prime).map(unit).collect(); n_sinks];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source_rows: BTreeMap<EdgeId, Vec<FieldElem>> = BTreeMap::new();
    let mut local_coeffs: BTreeMap<(EdgeId, EdgeId), FieldElem> = BTreeMap::new();
    let mut edge_vec: Vec<Vec<u64>> = vec![Vec::new(); net.edge_count()];

    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let at_source = tail == net.source();
        if users[e].is_empty() {
            // off every path: source edges get a zero row, single-input
            // nodes forward, everything else contributes nothing
            if at_source {
                source_rows.insert(e, vec![field.zero(); h_prime]);
                edge_vec[e] = vec![0; h_prime];
            } else {
                let ins = net.in_edges(tail);
                let forward = ins.len() == 1;
                let mut v = vec![0u64; h_prime];
                for &e_in in ins {
                    let c = if forward { field.one() } else { field.zero() };
                    if forward {
                        for (a, b) in v.iter_mut().zip(&edge_vec[e_in]) {
                            *a = field.add_bits(*a, *b);
                        }
                    }
                    local_coeffs.insert((e_in, e), c);
                }
                edge_vec[e] = v;
            }
            continue;
        }

        // prev vectors, keyed deterministically
        let prev_vec = |p: Prev| -> Vec<u64> {
            match p {
                Prev::Virtual(i) => unit(i),
                Prev::Edge(id) => edge_vec[id].clone(),
            }
        };
        let mut keys: Vec<Prev> = users[e].iter().map(|&(_, _, p)| p).collect();
        keys.sort_unstable();
        keys.dedup();

        // one dual vector per affected sink: row p of the inverse of the
        // frontier matrix, so dual . frontier_column_j = delta(p, j)
        let mut constraints = Vec::new();
        for &(s_idx, p_idx, prev) in &users[e] {
            let m: Vec<Vec<u64>> = (0..h_prime)
                .map(|r| (0..h_prime).map(|c| frontier[s_idx][c][r]).collect())
                .collect();
            let inv = inverse_bits(field, &m).ok_or_else(|| {
                Error::Inconsistent("frontier matrix lost invertibility".into())
            })?;
            let dual = inv[p_idx].clone();
            constraints.push((s_idx, p_idx, prev, dual));
        }

        // choose x (one coefficient per prev key) greedily: fix violated
        // constraints by adjusting their own predecessor's coefficient,
        // never breaking the ones already satisfied
        let dot = |a: &[u64], b: &[u64]| -> u64 {
            a.iter()
                .zip(b)
                .fold(0u64, |acc, (&x, &y)| field.add_bits(acc, field.mul_bits(x, y)))
        };
        let mut x: BTreeMap<Prev, u64> = keys.iter().map(|&k| (k, 0u64)).collect();
        let eval = |x: &BTreeMap<Prev, u64>, dual: &[u64]| -> u64 {
            let mut acc = 0u64;
            for (&k, &coeff) in x {
                if coeff != 0 {
                    acc = field.add_bits(acc, field.mul_bits(coeff, dot(&prev_vec(k), dual)));
                }
            }
            acc
        };
        for idx in 0..constraints.len() {
            if eval(&x, &constraints[idx].3) != 0 {
                continue;
            }
            let own = constraints[idx].2;
            let mut found = false;
            for cand in candidate_scan(&mut rng, field.size()) {
                let saved = x[&own];
                x.insert(own, cand);
                let good = (0..=idx).all(|c| eval(&x, &constraints[c].3) != 0);
                if good {
                    found = true;
                    break;
                }
                x.insert(own, saved);
            }
            if !found {
                return Err(Error::SearchExhausted(format!(
                    "no coefficient keeps all frontiers invertible at edge {e}"
                )));
            }
        }

        // freeze the chosen combination into the code
        let mut v = vec![0u64; h_prime];
        for (&k, &coeff) in &x {
            let w = prev_vec(k);
            for (a, b) in v.iter_mut().zip(&w) {
                *a = field.add_bits(*a, field.mul_bits(coeff, *b));
            }
        }
        if at_source {
            let row: Vec<FieldElem> = (0..h_prime)
                .map(|i| {
                    field
                        .elem(x.get(&Prev::Virtual(i)).copied().unwrap_or(0))
                        .expect("in range")
                })
                .collect();
            source_rows.insert(e, row);
        } else {
            for &e_in in net.in_edges(tail) {
                let bits = x.get(&Prev::Edge(e_in)).copied().unwrap_or(0);
                local_coeffs.insert((e_in, e), field.elem(bits).expect("in range"));
            }
        }
        edge_vec[e] = v.clone();
        for &(s_idx, p_idx, _) in &users[e] {
            frontier[s_idx][p_idx] = v.clone();
        }
    }

    let sink_selectors: Vec<Vec<EdgeId>> = paths_per_sink
        .iter()
        .map(|paths| paths.iter().map(|p| *p.last().unwrap()).collect())
        .collect();
    let code = NetworkCode {
        field: field.clone(),
        h_prime,
        source_rows,
        local_coeffs,
        sink_selectors,
    };
    let report = verify_multicast(net, &code)?;
    if !report.ok {
        return Err(Error::Inconsistent(
            "constructed code failed its own verification".into(),
        ));
    }
    Ok(code)
}

/// Full-cycle pseudo-random scan over `0..q` for a power-of-two `q`:
/// an affine walk with an odd stride visits every value exactly once.
fn candidate_scan(rng: &mut ChaCha8Rng, q: u64) -> impl Iterator<Item = u64> {
    let start = rng.gen_range(0..q);
    let step = rng.gen_range(0..q / 2).wrapping_mul(2).wrapping_add(1) % q.max(1);
    (0..q).map(move |i| (start.wrapping_add(i.wrapping_mul(step))) % q)
}
