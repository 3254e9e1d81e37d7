//! Field reduction: lift, take determinants, multiply, find a coprime,
//! reduce, re-verify.
//!
//! Every coding coefficient of a verified code is lifted to its residue
//! polynomial. Decodability then lives in polynomial determinants: one
//! per sink for multicast, one per (error set, sink) minor for error
//! correction. Their product `f(X)` is nonzero, so a least-degree
//! irreducible `g(X)` coprime to `f(X)` — when one exists below the cap —
//! yields a smaller field in which every determinant stays nonzero, and
//! the code reduced mod `g(X)` inherits all of its rank properties.

use std::fmt::Write as _;

use serde_json::json;

use crate::coprime::{least_degree_coprime, CoprimeResult};
use crate::field::{Field, FieldElem};
use crate::gf2poly::BinPoly;
use crate::graph::{insert_error_tap, Network};
use crate::multicast::{verify_multicast, NetworkCode};
use crate::nec::{sink_paths, verify_nec};
use crate::polymat::{find_full_rank_submatrix, PolyMatrix};
use crate::{Error, Result};

/// One decodability determinant and its degree.
#[derive(Clone, Debug)]
pub struct MinorInfo {
    /// `T <name>` for multicast, `F {ids} T <name>` for error correction.
    pub label: String,
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub enum ReductionOutcome {
    /// A smaller field was found; the carried code is already re-verified.
    Reduced { code: NetworkCode },
    /// No useful coprime polynomial below the cap; the input stands.
    Unchanged,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub minors: Vec<MinorInfo>,
    /// The product `f(X)` of all minors.
    pub product: BinPoly,
    pub product_degree: usize,
    pub coprime: CoprimeResult,
    pub outcome: ReductionOutcome,
    /// Field the input code lived in.
    pub initial_field: Field,
}

/// Entrywise lift of all coefficients followed by propagation over
/// `F_2[X]`: the global vectors as free polynomials in `X`.
fn propagate_poly(net: &Network, code: &NetworkCode) -> Result<Vec<Vec<BinPoly>>> {
    let mut vecs: Vec<Option<Vec<BinPoly>>> = vec![None; net.edge_count()];
    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let v = if tail == net.source() {
            let row = code.source_rows.get(&e).ok_or(Error::MissingSourceRow(e))?;
            row.iter().map(FieldElem::to_binpoly).collect()
        } else {
            let mut acc = vec![BinPoly::zero(); code.h_prime];
            for &e_in in net.in_edges(tail) {
                let c = code
                    .local_coeffs
                    .get(&(e_in, e))
                    .ok_or(Error::MissingCoefficient { e_in, e_out: e })?;
                if c.is_zero() {
                    continue;
                }
                let cp = c.to_binpoly();
                let w = vecs[e_in].as_ref().expect("topological order");
                for (a, b) in acc.iter_mut().zip(w) {
                    *a = a.add(&cp.mul(b));
                }
            }
            acc
        };
        vecs[e] = Some(v);
    }
    Ok(vecs.into_iter().map(|v| v.unwrap()).collect())
}

/// Lifted error-transfer polynomials, mirroring the field-level version.
fn error_transfer_poly(net: &Network, code: &NetworkCode) -> Result<Vec<Vec<BinPoly>>> {
    let ecount = net.edge_count();
    let mut phi: Vec<Vec<BinPoly>> = vec![Vec::new(); ecount];
    for e in net.topo_edges()? {
        let tail = net.edge(e).tail;
        let mut col = vec![BinPoly::zero(); ecount];
        if tail != net.source() {
            for &e_in in net.in_edges(tail) {
                let c = code
                    .local_coeffs
                    .get(&(e_in, e))
                    .ok_or(Error::MissingCoefficient { e_in, e_out: e })?;
                if c.is_zero() {
                    continue;
                }
                let cp = c.to_binpoly();
                for (a, b) in col.iter_mut().zip(&phi[e_in]) {
                    *a = a.add(&cp.mul(b));
                }
            }
        }
        col[e] = col[e].add(&BinPoly::one());
        phi[e] = col;
    }
    Ok(phi)
}

/// Maps every coefficient of `code` through lift-then-reduce into the
/// field defined by `g`. Selectors are 0/1 structure and stay put.
fn reduce_code(code: &NetworkCode, g: &BinPoly) -> Result<NetworkCode> {
    let k = g.degree().ok_or(Error::ConstantPolynomial)?;
    let field = Field::new(k, g.clone())?;
    let map = |e: &FieldElem| field.reduce(&e.to_binpoly());
    Ok(NetworkCode {
        field: field.clone(),
        h_prime: code.h_prime,
        source_rows: code
            .source_rows
            .iter()
            .map(|(&e, row)| (e, row.iter().map(map).collect()))
            .collect(),
        local_coeffs: code
            .local_coeffs
            .iter()
            .map(|(&pair, c)| (pair, map(c)))
            .collect(),
        sink_selectors: code.sink_selectors.clone(),
    })
}

fn empty_coprime(cap: usize) -> CoprimeResult {
    CoprimeResult {
        g: None,
        j: None,
        first_nonzero_p: None,
        reduced_remainder: None,
        searched_cap: cap,
        trace: Vec::new(),
    }
}

/// Reduces a verified multicast code to the least-degree useful field.
///
/// `cap` bounds the degree of the replacement polynomial; the default
/// `k-1` admits exactly the fields smaller than the current one.
pub fn reduce_multicast(
    net: &Network,
    code: &NetworkCode,
    cap: Option<usize>,
) -> Result<ReductionReport> {
    let before = verify_multicast(net, code)?;
    if !before.ok {
        let bad = before.per_sink.iter().find(|s| !s.ok).unwrap();
        return Err(Error::InvalidCode(format!(
            "sink {} has rank {} before reduction",
            bad.sink, bad.rank
        )));
    }
    let k = code.field.k();
    let cap = cap.unwrap_or(k.saturating_sub(1));

    let poly_gev = propagate_poly(net, code)?;
    let mut minors = Vec::new();
    let mut product = BinPoly::one();
    for (idx, &t) in net.sinks().iter().enumerate() {
        let sel = &code.sink_selectors[idx];
        let m = PolyMatrix::from_fn(code.h_prime, code.h_prime, |r, c| {
            poly_gev[sel[c]][r].clone()
        });
        let det = m.det()?;
        if det.is_zero() {
            return Err(Error::Inconsistent(format!(
                "verified sink {} produced a zero lifted determinant",
                net.node_name(t)
            )));
        }
        minors.push(MinorInfo {
            label: format!("T {}", net.node_name(t)),
            degree: det.degree().unwrap_or(0),
        });
        product = product.mul(&det);
    }
    let product_degree = product.degree().unwrap_or(0);

    let coprime = if cap >= 1 {
        least_degree_coprime(&product, cap)?
    } else {
        empty_coprime(cap)
    };
    let outcome = match &coprime.g {
        None => ReductionOutcome::Unchanged,
        Some(g) => {
            let reduced = reduce_code(code, g)?;
            let after = verify_multicast(net, &reduced)?;
            if !after.ok {
                return Err(Error::Inconsistent(
                    "reduced multicast code failed verification".into(),
                ));
            }
            ReductionOutcome::Reduced { code: reduced }
        }
    };
    Ok(ReductionReport {
        minors,
        product,
        product_degree,
        coprime,
        outcome,
        initial_field: code.field.clone(),
    })
}

/// Reduces a verified `alpha`-error-correcting code: one full-rank minor
/// per (error set, sink) is lifted and multiplied into `f(X)`, then the
/// coefficients are reduced mod the found coprime and every witness is
/// re-checked.
///
/// The default cap is `min(k-1, ceil(log2(N |family|)))`.
pub fn reduce_nec(
    net: &Network,
    code: &NetworkCode,
    alpha: usize,
    cap: Option<usize>,
) -> Result<ReductionReport> {
    let before = verify_nec(net, code, alpha)?;
    if !before.ok {
        let bad = before.witnesses.iter().find(|w| !w.ok).unwrap();
        return Err(Error::InvalidCode(format!(
            "witness (F={:?}, sink {}) has rank {} of {} before reduction",
            bad.f,
            bad.sink,
            bad.rank,
            code.h_prime + bad.m
        )));
    }
    let k_field = code.field.k();
    let k = code.h_prime;
    let family_size = before.witnesses.len() / net.sinks().len();
    let nf = (net.sinks().len() as u128).saturating_mul(family_size as u128);
    let default_cap = (k_field.saturating_sub(1)).min(ceil_log2(nf).max(1));
    let cap = cap.unwrap_or(default_cap);

    let gev_bits = crate::multicast::propagate_bits(net, code)?;
    let phi_bits = crate::nec::error_transfer_bits(net, code)?;
    let gev_poly = propagate_poly(net, code)?;
    let phi_poly = error_transfer_poly(net, code)?;

    let params = crate::nec::NecParams::derive(net, alpha, &code.field)?;
    let mut minors = Vec::new();
    let mut product = BinPoly::one();
    for f_set in &params.family {
        let tapped = insert_error_tap(net, f_set, k)?;
        for &t in net.sinks() {
            let paths = sink_paths(&tapped, t, alpha, k)?;
            let terminals = paths.terminals();
            let want = k + paths.m;
            // field-level witness, used only to pick the minor
            let b_field: Vec<Vec<FieldElem>> = (0..k + 2 * alpha)
                .map(|r| {
                    terminals
                        .iter()
                        .map(|&e| {
                            let bits = if r < k {
                                gev_bits[e][r]
                            } else {
                                phi_bits[e][f_set[r - k]]
                            };
                            code.field.elem(bits).expect("in range")
                        })
                        .collect()
                })
                .collect();
            let (rows, cols) = find_full_rank_submatrix(&b_field, want)?;
            let m_poly = PolyMatrix::from_fn(want, want, |i, j| {
                let r = rows[i];
                let e = terminals[cols[j]];
                if r < k {
                    gev_poly[e][r].clone()
                } else {
                    phi_poly[e][f_set[r - k]].clone()
                }
            });
            let det = m_poly.det()?;
            if det.is_zero() {
                return Err(Error::Inconsistent(
                    "full-rank witness produced a zero lifted minor".into(),
                ));
            }
            minors.push(MinorInfo {
                label: format!("F {:?} T {}", f_set, net.node_name(t)),
                degree: det.degree().unwrap_or(0),
            });
            product = product.mul(&det);
        }
    }
    let product_degree = product.degree().unwrap_or(0);

    let coprime = if cap >= 1 {
        least_degree_coprime(&product, cap)?
    } else {
        empty_coprime(cap)
    };
    let outcome = match &coprime.g {
        None => ReductionOutcome::Unchanged,
        Some(g) => {
            let reduced = reduce_code(code, g)?;
            let after = verify_nec(net, &reduced, alpha)?;
            if !after.ok {
                return Err(Error::Inconsistent(
                    "reduced error-correcting code failed verification".into(),
                ));
            }
            ReductionOutcome::Reduced { code: reduced }
        }
    };
    Ok(ReductionReport {
        minors,
        product,
        product_degree,
        coprime,
        outcome,
        initial_field: code.field.clone(),
    })
}

fn ceil_log2(n: u128) -> usize {
    if n <= 1 {
        return 0;
    }
    (128 - (n - 1).leading_zeros()) as usize
}

/// Provenance stamped into rendered reports.
#[derive(Clone, Debug, Default)]
pub struct ReportMeta {
    pub seed: Option<u64>,
    pub version: String,
}

impl ReductionReport {
    /// Renders the aligned text table with the canonical row labels.
    pub fn render_text(&self, net: &Network, meta: &ReportMeta) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# field reduction report (tool v{}, field GF(2^{})/({}){})",
            meta.version,
            self.initial_field.k(),
            self.initial_field.modulus(),
            match meta.seed {
                Some(seed) => format!(", seed {seed}"),
                None => String::new(),
            }
        );
        let n = self.minors.len();
        let rows = self.rows_common(n);
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        for (label, value) in rows {
            let _ = writeln!(s, "{label:<width$} | {value}");
        }
        let _ = writeln!(s, "{:<width$} |", "Resultant network code");
        match &self.outcome {
            ReductionOutcome::Unchanged => {
                let _ = writeln!(s, "{:<width$} |   Not applicable", "");
            }
            ReductionOutcome::Reduced { code } => {
                for line in describe_code(net, code) {
                    let _ = writeln!(s, "{:<width$} |   {line}", "");
                }
            }
        }
        s
    }

    fn rows_common(&self, n: usize) -> Vec<(String, String)> {
        let mut rows = Vec::new();
        rows.push((
            format!("Degree of f(X), the product of the {n} determinant polynomials"),
            self.product_degree.to_string(),
        ));
        let (p_str, r_str, g_str) = match (&self.coprime.first_nonzero_p, &self.coprime.g) {
            (Some(p), Some(g)) => (
                p.to_string(),
                self.coprime.reduced_remainder.as_ref().unwrap().to_string(),
                g.to_string(),
            ),
            _ => (
                format!(
                    "None of the form X^(2^i)+X, for i <= {}",
                    self.coprime.searched_cap
                ),
                "Not applicable".to_string(),
                "Not applicable".to_string(),
            ),
        };
        rows.push((
            "p(X): First p_i(X) for which f(X)(mod p_i(X)) is non-zero".to_string(),
            p_str,
        ));
        rows.push(("f(X)(mod p(X))".to_string(), r_str));
        rows.push(("g(X): Least degree polynomial coprime to f(X)".to_string(), g_str));
        rows
    }

    /// JSON form carrying the same values as the text table, plus the
    /// full reduced code when one exists.
    pub fn render_json(&self, net: &Network, meta: &ReportMeta) -> serde_json::Value {
        let (reduced_field, reduced_code) = match &self.outcome {
            ReductionOutcome::Reduced { code } => (
                json!({"k": code.field.k(), "modulus": code.field.modulus().to_string()}),
                crate::codefile::code_to_json(net, code),
            ),
            ReductionOutcome::Unchanged => (serde_json::Value::Null, serde_json::Value::Null),
        };
        json!({
            "tool_version": meta.version,
            "seed": meta.seed,
            "initial_field": {
                "k": self.initial_field.k(),
                "modulus": self.initial_field.modulus().to_string(),
            },
            "minors": self
                .minors
                .iter()
                .map(|m| json!({"label": m.label, "degree": m.degree}))
                .collect::<Vec<_>>(),
            "product_degree": self.product_degree,
            "filtration": self
                .coprime
                .trace
                .iter()
                .map(|st| json!({
                    "i": st.i,
                    "p": st.modulus.to_string(),
                    "remainder": st.remainder.to_string(),
                }))
                .collect::<Vec<_>>(),
            "searched_cap": self.coprime.searched_cap,
            "first_nonzero_p": self.coprime.first_nonzero_p.as_ref().map(|p| p.to_string()),
            "remainder": self.coprime.reduced_remainder.as_ref().map(|r| r.to_string()),
            "g": self.coprime.g.as_ref().map(|g| g.to_string()),
            "outcome": match self.outcome {
                ReductionOutcome::Reduced { .. } => "reduced",
                ReductionOutcome::Unchanged => "unchanged",
            },
            "reduced_field": reduced_field,
            "reduced_code": reduced_code,
        })
    }
}

/// Human-readable lines describing a code: source vectors, then the
/// local coefficients that differ from 1.
fn describe_code(net: &Network, code: &NetworkCode) -> Vec<String> {
    let f = &code.field;
    let mut lines = Vec::new();
    for (e, row) in &code.source_rows {
        let cells: Vec<String> = row
            .iter()
            .map(|x| format!("{} (0x{:x})", f.render(x), x.bits()))
            .collect();
        lines.push(format!(
            "source edge {e} ({} -> {}): [{}]",
            net.node_name(net.edge(*e).tail),
            net.node_name(net.edge(*e).head),
            cells.join(", ")
        ));
    }
    let nontrivial: Vec<String> = code
        .local_coeffs
        .iter()
        .filter(|(_, c)| !c.is_zero() && **c != f.one())
        .map(|(&(a, b), c)| format!("({a},{b}) = {} (0x{:x})", f.render(c), c.bits()))
        .collect();
    if !nontrivial.is_empty() {
        lines.push(format!("local coefficients != 0,1: {}", nontrivial.join(", ")));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::graph::gen_combination_network;
    use crate::multicast::tests::example_rows;

    fn reduce_example(set_b: bool, modulus: &str) -> (Network, ReductionReport) {
        let field = Field::new(5, modulus.parse().unwrap()).unwrap();
        let net = gen_combination_network(6, 3).unwrap();
        let rows = example_rows(&field, if set_b { 6 } else { 0 });
        let code =
            NetworkCode::assemble(&net, &field, 3, rows, &[], &field.one()).unwrap();
        let report = reduce_multicast(&net, &code, None).unwrap();
        (net, report)
    }

    #[test]
    fn worked_example_first_column() {
        let (_, report) = reduce_example(false, "X^5+X^2+1");
        assert_eq!(report.product_degree, 20);
        assert_eq!(
            report.coprime.first_nonzero_p,
            Some("X^4+X".parse().unwrap())
        );
        assert_eq!(
            report.coprime.reduced_remainder,
            Some("X^2+X".parse().unwrap())
        );
        assert_eq!(report.coprime.g, Some("X^2+X+1".parse().unwrap()));
        let ReductionOutcome::Reduced { code } = &report.outcome else {
            panic!("expected a reduction");
        };
        assert_eq!(code.field.k(), 2);
        // degree bookkeeping: sum of minor degrees equals the product degree
        let sum: usize = report.minors.iter().map(|m| m.degree).sum();
        assert_eq!(sum, report.product_degree);
    }

    #[test]
    fn worked_example_unchanged_column() {
        let (_, report) = reduce_example(true, "X^5+X^3+X^2+X+1");
        assert_eq!(report.product_degree, 55);
        assert!(report.coprime.g.is_none());
        assert!(matches!(report.outcome, ReductionOutcome::Unchanged));
        assert_eq!(report.coprime.trace.len(), 4);
    }

    #[test]
    fn rejects_invalid_input_code() {
        let field = Field::new(5, "X^5+X^2+1".parse().unwrap()).unwrap();
        let net = gen_combination_network(6, 3).unwrap();
        let mut rows = example_rows(&field, 0);
        rows.insert(0, vec![field.zero(); 3]);
        let code = NetworkCode::assemble(&net, &field, 3, rows, &[], &field.one()).unwrap();
        assert!(matches!(
            reduce_multicast(&net, &code, None),
            Err(Error::InvalidCode(_))
        ));
    }

    #[test]
    fn product_coprimality_extends_to_every_minor() {
        // gcd(g, f) = 1 forces gcd(g, f_T) = 1 for each sink factor; check
        // it directly on a run that reduces
        let field = Field::new(5, "X^5+X^2+1".parse().unwrap()).unwrap();
        let net = gen_combination_network(6, 3).unwrap();
        let rows = example_rows(&field, 0);
        let code = NetworkCode::assemble(&net, &field, 3, rows, &[], &field.one()).unwrap();
        let poly_gev = propagate_poly(&net, &code).unwrap();
        let report = reduce_multicast(&net, &code, None).unwrap();
        let g = report.coprime.g.clone().unwrap();
        for (idx, _) in net.sinks().iter().enumerate() {
            let sel = &code.sink_selectors[idx];
            let m = PolyMatrix::from_fn(3, 3, |r, c| poly_gev[sel[c]][r].clone());
            let det = m.det().unwrap();
            assert!(det.gcd(&g).unwrap().is_one());
        }
    }

    #[test]
    fn nec_reduction_on_parallel_edges() {
        let net = Network::parse(
            "node s\nnode t\nedge 0 s t\nedge 1 s t\nedge 2 s t\nsource s\nsink t\n",
        )
        .unwrap();
        let field = Field::new(5, "X^5+X^2+1".parse().unwrap()).unwrap();
        let (code, _) = crate::nec::construct_nec(&net, 1, &field, 17).unwrap();
        let report = reduce_nec(&net, &code, 1, None).unwrap();
        assert_eq!(report.minors.len(), 3);
        if let ReductionOutcome::Reduced { code: reduced } = &report.outcome {
            assert!(reduced.field.k() < 5);
            assert!(verify_nec(&net, reduced, 1).unwrap().ok);
            // error correction survives operationally
            assert!(crate::nec::decode_sweep(&net, reduced, 1, 1 << 24).unwrap());
        }
    }

    #[test]
    fn text_and_json_reports_agree() {
        let (net, report) = reduce_example(false, "X^5+X^2+1");
        let meta = ReportMeta { seed: Some(1), version: "test".into() };
        let text = report.render_text(&net, &meta);
        let js = report.render_json(&net, &meta);
        assert!(text.contains("Degree of f(X), the product of the 20 determinant polynomials"));
        assert!(text.contains(&format!("| {}", js["product_degree"])));
        assert!(text.contains(js["g"].as_str().unwrap()));
        assert!(text.contains(js["first_nonzero_p"].as_str().unwrap()));
        assert!(text.contains(js["remainder"].as_str().unwrap()));
        assert_eq!(js["outcome"], "reduced");
    }
}
