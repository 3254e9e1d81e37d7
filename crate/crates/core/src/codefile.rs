//! On-disk JSON forms: full codes and pinned initial coefficients.
//!
//! Code files carry residues in hex for bit-exactness; coefficient files
//! (used to pin a known starting code) additionally accept the `b^e`
//! power notation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::field::Field;
use crate::graph::{EdgeId, Network};
use crate::multicast::NetworkCode;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct FieldDto {
    k: usize,
    modulus: String,
}

#[derive(Serialize, Deserialize)]
struct CodeFileDto {
    field: FieldDto,
    h_prime: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<usize>,
    source_rows: BTreeMap<String, Vec<String>>,
    local_coeffs: Vec<(EdgeId, EdgeId, String)>,
    sink_selectors: BTreeMap<String, Vec<EdgeId>>,
}

/// Serializes a code (optionally tagged with its error-correction
/// capability) against the network it belongs to.
pub fn code_to_json_with_alpha(
    net: &Network,
    code: &NetworkCode,
    alpha: Option<usize>,
) -> serde_json::Value {
    let dto = CodeFileDto {
        field: FieldDto {
            k: code.field.k(),
            modulus: code.field.modulus().to_string(),
        },
        h_prime: code.h_prime,
        alpha,
        source_rows: code
            .source_rows
            .iter()
            .map(|(e, row)| {
                (
                    e.to_string(),
                    row.iter().map(|x| format!("0x{:x}", x.bits())).collect(),
                )
            })
            .collect(),
        local_coeffs: code
            .local_coeffs
            .iter()
            .map(|(&(a, b), c)| (a, b, format!("0x{:x}", c.bits())))
            .collect(),
        sink_selectors: net
            .sinks()
            .iter()
            .enumerate()
            .map(|(i, &t)| (net.node_name(t).to_string(), code.sink_selectors[i].clone()))
            .collect(),
    };
    serde_json::to_value(&dto).expect("dto serializes")
}

pub fn code_to_json(net: &Network, code: &NetworkCode) -> serde_json::Value {
    code_to_json_with_alpha(net, code, None)
}

/// Reads a code file back; returns the code and the `alpha` tag if any.
pub fn code_from_json(
    net: &Network,
    v: &serde_json::Value,
) -> Result<(NetworkCode, Option<usize>)> {
    let dto: CodeFileDto = serde_json::from_value(v.clone())?;
    let modulus = dto.field.modulus.parse()?;
    let field = Field::new(dto.field.k, modulus)?;
    let mut source_rows = BTreeMap::new();
    for (e_str, row) in &dto.source_rows {
        let e: EdgeId = e_str
            .parse()
            .map_err(|_| Error::Parse(format!("bad edge id {e_str:?} in source_rows")))?;
        if e >= net.edge_count() {
            return Err(Error::BadEdgeId(e));
        }
        let parsed = row
            .iter()
            .map(|s| field.parse_elem(s))
            .collect::<Result<Vec<_>>>()?;
        if parsed.len() != dto.h_prime {
            return Err(Error::Shape(format!(
                "source row for edge {e} has length {}, expected {}",
                parsed.len(),
                dto.h_prime
            )));
        }
        source_rows.insert(e, parsed);
    }
    let mut local_coeffs = BTreeMap::new();
    for (a, b, s) in &dto.local_coeffs {
        if *a >= net.edge_count() || *b >= net.edge_count() {
            return Err(Error::BadEdgeId((*a).max(*b)));
        }
        local_coeffs.insert((*a, *b), field.parse_elem(s)?);
    }
    let mut sink_selectors = vec![Vec::new(); net.sinks().len()];
    for (name, sel) in &dto.sink_selectors {
        let pos = net
            .sinks()
            .iter()
            .position(|&t| net.node_name(t) == name)
            .ok_or_else(|| Error::Parse(format!("unknown sink {name:?} in code file")))?;
        sink_selectors[pos] = sel.clone();
    }
    Ok((
        NetworkCode {
            field,
            h_prime: dto.h_prime,
            source_rows,
            local_coeffs,
            sink_selectors,
        },
        dto.alpha,
    ))
}

/// Pinned starting coefficients: source vectors plus optional local
/// coefficient overrides, everything else defaulting to `default_local`.
#[derive(Serialize, Deserialize)]
pub struct CoeffsFile {
    pub source_vectors: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub local_coeffs: Vec<(EdgeId, EdgeId, String)>,
    /// Coefficient for unlisted adjacent pairs; defaults to "1", matching
    /// plain forwarding.
    #[serde(default)]
    pub default_local: Option<String>,
}

/// Builds the pinned code described by a coefficients file.
pub fn assemble_from_coeffs(
    net: &Network,
    field: &Field,
    coeffs: &CoeffsFile,
) -> Result<NetworkCode> {
    let mut source_rows = BTreeMap::new();
    let mut h_prime = None;
    for (e_str, row) in &coeffs.source_vectors {
        let e: EdgeId = e_str
            .parse()
            .map_err(|_| Error::Parse(format!("bad edge id {e_str:?} in source_vectors")))?;
        let parsed = row
            .iter()
            .map(|s| field.parse_elem(s))
            .collect::<Result<Vec<_>>>()?;
        match h_prime {
            None => h_prime = Some(parsed.len()),
            Some(h) if h == parsed.len() => {}
            Some(h) => {
                return Err(Error::Shape(format!(
                    "source vectors disagree on dimension: {} vs {}",
                    h,
                    parsed.len()
                )))
            }
        }
        source_rows.insert(e, parsed);
    }
    let h_prime = h_prime.ok_or_else(|| Error::Parse("empty source_vectors".into()))?;
    let overrides = coeffs
        .local_coeffs
        .iter()
        .map(|(a, b, s)| Ok((*a, *b, field.parse_elem(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let default = match &coeffs.default_local {
        Some(s) => field.parse_elem(s)?,
        None => field.one(),
    };
    NetworkCode::assemble(net, field, h_prime, source_rows, &overrides, &default)
}

/// Convenience: a coefficients file value for a code whose source edges
/// carry the given vectors (power notation allowed) over forwarding.
pub fn coeffs_json(source_vectors: &[(EdgeId, Vec<&str>)]) -> serde_json::Value {
    json!({
        "source_vectors": source_vectors
            .iter()
            .map(|(e, v)| (e.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_combination_network;

    #[test]
    fn code_file_round_trip() {
        let field = Field::new(5, "X^5+X^2+1".parse().unwrap()).unwrap();
        let net = gen_combination_network(4, 2).unwrap();
        let code = crate::multicast::construct_multicast(&net, 2, &field, 3).unwrap();
        let v = code_to_json_with_alpha(&net, &code, Some(1));
        let (back, alpha) = code_from_json(&net, &v).unwrap();
        assert_eq!(alpha, Some(1));
        assert_eq!(back.h_prime, code.h_prime);
        assert_eq!(back.field, code.field);
        assert_eq!(back.source_rows, code.source_rows);
        assert_eq!(back.local_coeffs, code.local_coeffs);
        assert_eq!(back.sink_selectors, code.sink_selectors);
    }

    #[test]
    fn coeffs_file_pins_the_worked_example() {
        let field = Field::new(5, "X^5+X^2+1".parse().unwrap()).unwrap();
        let net = gen_combination_network(6, 3).unwrap();
        let doc: CoeffsFile = serde_json::from_value(json!({
            "source_vectors": {
                "0": ["1", "0", "0"],
                "1": ["0", "1", "0"],
                "2": ["0", "0", "1"],
                "3": ["1", "1", "1"],
                "4": ["1", "b", "b^18"],
                "5": ["1", "b^18", "b^5"],
            }
        }))
        .unwrap();
        let code = assemble_from_coeffs(&net, &field, &doc).unwrap();
        assert_eq!(code.h_prime, 3);
        assert!(crate::multicast::verify_multicast(&net, &code).unwrap().ok);
        // unlisted pairs default to forwarding
        assert_eq!(code.local_coeffs[&(0, 6)], field.one());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let field = Field::new(2, "X^2+X+1".parse().unwrap()).unwrap();
        let net = gen_combination_network(3, 2).unwrap();
        let doc: CoeffsFile = serde_json::from_value(json!({
            "source_vectors": {"0": ["1", "0"], "1": ["0", "1"], "2": ["1", "1", "1"]}
        }))
        .unwrap();
        assert!(matches!(
            assemble_from_coeffs(&net, &field, &doc),
            Err(Error::Shape(_))
        ));
    }
}
