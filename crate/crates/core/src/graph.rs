//! Acyclic directed multigraphs with unit-capacity edges.
//!
//! Edge ids are explicit and dense (`0..|E|-1`); every flow computation
//! scans arcs in ascending id order, so path families — and everything
//! built on them — are reproducible run to run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::json;

use crate::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
}

/// A single-source acyclic network with unit-capacity edges. Links of
/// higher capacity are modeled as parallel edges.
#[derive(Clone, Debug)]
pub struct Network {
    names: Vec<String>,
    edges: Vec<Edge>,
    source: NodeId,
    sinks: Vec<NodeId>,
    out: Vec<Vec<EdgeId>>,
    inn: Vec<Vec<EdgeId>>,
}

/// Mincut data computed by [`Network::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowProfile {
    /// Unicast capacity per sink, in sink order.
    pub h_per_sink: Vec<usize>,
    /// Multicast capacity: the minimum over sinks.
    pub h: usize,
    /// Longest source-to-sink path length, in edges.
    pub lambda: usize,
}

impl Network {
    /// Builds a network from node names, edges given as `(tail, head)`
    /// name pairs in edge-id order, the source name and sink names.
    pub fn new(
        names: Vec<String>,
        edge_pairs: Vec<(String, String)>,
        source: &str,
        sinks: &[String],
    ) -> Result<Network> {
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate node {n:?}")));
            }
        }
        let look = |n: &str| -> Result<NodeId> {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::Parse(format!("unknown node {n:?}")))
        };
        let mut edges = Vec::with_capacity(edge_pairs.len());
        for (t, h) in &edge_pairs {
            edges.push(Edge { tail: look(t)?, head: look(h)? });
        }
        let source = look(source)?;
        let sinks = sinks.iter().map(|s| look(s)).collect::<Result<Vec<_>>>()?;
        if sinks.is_empty() {
            return Err(Error::Parse("network has no sinks".into()));
        }
        let mut out = vec![Vec::new(); names.len()];
        let mut inn = vec![Vec::new(); names.len()];
        for (i, e) in edges.iter().enumerate() {
            out[e.tail].push(i);
            inn[e.head].push(i);
        }
        Ok(Network { names, edges, source, sinks, out, inn })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edge ids of `v`, ascending.
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out[v]
    }

    /// Incoming edge ids of `v`, ascending.
    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.inn[v]
    }

    /// Kahn topological order, smallest node id first among ready nodes.
    /// A cycle is reported with one of its edges as witness.
    pub fn topo_nodes(&self) -> Result<Vec<NodeId>> {
        let mut indeg: Vec<usize> = (0..self.node_count()).map(|v| self.inn[v].len()).collect();
        let mut ready: Vec<NodeId> = (0..self.node_count()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count());
        while let Some(&v) = ready.iter().min() {
            ready.retain(|&u| u != v);
            order.push(v);
            for &e in &self.out[v] {
                let h = self.edges[e].head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    ready.push(h);
                }
            }
        }
        if order.len() != self.node_count() {
            let leftover: Vec<bool> = {
                let mut l = vec![true; self.node_count()];
                for &v in &order {
                    l[v] = false;
                }
                l
            };
            let witness = self
                .edges
                .iter()
                .enumerate()
                .find(|(_, e)| leftover[e.tail] && leftover[e.head])
                .map(|(i, e)| {
                    format!("{} ({} -> {})", i, self.names[e.tail], self.names[e.head])
                })
                .unwrap_or_else(|| "?".into());
            return Err(Error::Cycle { edge: witness });
        }
        Ok(order)
    }

    /// Edge ids ordered by the topological position of their tails,
    /// breaking ties by edge id.
    pub fn topo_edges(&self) -> Result<Vec<EdgeId>> {
        let order = self.topo_nodes()?;
        let mut pos = vec![0usize; self.node_count()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut ids: Vec<EdgeId> = (0..self.edge_count()).collect();
        ids.sort_by_key(|&e| (pos[self.edges[e].tail], e));
        Ok(ids)
    }

    /// Checks acyclicity and sink reachability, then computes per-sink
    /// mincuts, the multicast capacity and the longest-path bound.
    pub fn validate(&self) -> Result<FlowProfile> {
        let order = self.topo_nodes()?;
        // reachability from the source
        let mut reach = vec![false; self.node_count()];
        reach[self.source] = true;
        for &v in &order {
            if !reach[v] {
                continue;
            }
            for &e in &self.out[v] {
                reach[self.edges[e].head] = true;
            }
        }
        for &t in &self.sinks {
            if !reach[t] {
                return Err(Error::UnreachableSink { sink: self.names[t].clone() });
            }
        }
        let arcs: Vec<(NodeId, NodeId)> = self.edges.iter().map(|e| (e.tail, e.head)).collect();
        let caps = vec![1u32; arcs.len()];
        let mut h_per_sink = Vec::with_capacity(self.sinks.len());
        for &t in &self.sinks {
            let (v, _) = max_flow(self.node_count(), &arcs, &caps, self.source, t, None);
            h_per_sink.push(v);
        }
        let h = h_per_sink.iter().copied().min().unwrap_or(0);
        // longest path from the source, in edges
        let mut dist = vec![None::<usize>; self.node_count()];
        dist[self.source] = Some(0);
        for &v in &order {
            let Some(d) = dist[v] else { continue };
            for &e in &self.out[v] {
                let h_node = self.edges[e].head;
                if dist[h_node].map_or(true, |cur| cur < d + 1) {
                    dist[h_node] = Some(d + 1);
                }
            }
        }
        let lambda = self
            .sinks
            .iter()
            .filter_map(|&t| dist[t])
            .max()
            .unwrap_or(0);
        Ok(FlowProfile { h_per_sink, h, lambda })
    }

    /// Exactly `count` pairwise edge-disjoint paths (as edge-id lists)
    /// from `from` to `to`; rejected with the achievable maximum if the
    /// flow falls short.
    pub fn edge_disjoint_paths(
        &self,
        from: NodeId,
        to: NodeId,
        count: usize,
    ) -> Result<Vec<Vec<EdgeId>>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let arcs: Vec<(NodeId, NodeId)> = self.edges.iter().map(|e| (e.tail, e.head)).collect();
        let caps = vec![1u32; arcs.len()];
        let (value, flow) = max_flow(self.node_count(), &arcs, &caps, from, to, Some(count));
        if value < count {
            let (max, _) = max_flow(self.node_count(), &arcs, &caps, from, to, None);
            return Err(Error::FlowInfeasible { requested: count, max });
        }
        Ok(decompose_paths(&arcs, &flow, from, to))
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for n in &self.names {
            let _ = writeln!(s, "node {n}");
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(s, "edge {i} {} {}", self.names[e.tail], self.names[e.head]);
        }
        let _ = writeln!(s, "source {}", self.names[self.source]);
        for &t in &self.sinks {
            let _ = writeln!(s, "sink {}", self.names[t]);
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.names,
            "edges": self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| json!([i, self.names[e.tail], self.names[e.head]]))
                .collect::<Vec<_>>(),
            "source": self.names[self.source],
            "sinks": self.sinks.iter().map(|&t| self.names[t].clone()).collect::<Vec<_>>(),
        })
    }

    /// Parses either the text format or the JSON equivalent (detected by a
    /// leading `{`).
    pub fn parse(input: &str) -> Result<Network> {
        if input.trim_start().starts_with('{') {
            Self::from_json(&serde_json::from_str(input)?)
        } else {
            Self::from_text(input)
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Network> {
        let bad = |what: &str| Error::Parse(format!("network json: bad {what}"));
        let names: Vec<String> = v
            .get("nodes")
            .and_then(|n| n.as_array())
            .ok_or_else(|| bad("nodes"))?
            .iter()
            .map(|n| n.as_str().map(String::from).ok_or_else(|| bad("node name")))
            .collect::<Result<_>>()?;
        let raw_edges = v
            .get("edges")
            .and_then(|e| e.as_array())
            .ok_or_else(|| bad("edges"))?;
        let mut with_ids = Vec::new();
        for e in raw_edges {
            let arr = e.as_array().ok_or_else(|| bad("edge entry"))?;
            if arr.len() != 3 {
                return Err(bad("edge entry"));
            }
            let id = arr[0].as_u64().ok_or_else(|| bad("edge id"))? as usize;
            let tail = arr[1].as_str().ok_or_else(|| bad("edge tail"))?.to_string();
            let head = arr[2].as_str().ok_or_else(|| bad("edge head"))?.to_string();
            with_ids.push((id, tail, head));
        }
        let source = v
            .get("source")
            .and_then(|s| s.as_str())
            .ok_or_else(|| bad("source"))?;
        let sinks: Vec<String> = v
            .get("sinks")
            .and_then(|s| s.as_array())
            .ok_or_else(|| bad("sinks"))?
            .iter()
            .map(|s| s.as_str().map(String::from).ok_or_else(|| bad("sink name")))
            .collect::<Result<_>>()?;
        let edges = order_by_ids(with_ids)?;
        Network::new(names, edges, source, &sinks)
    }

    pub fn from_text(input: &str) -> Result<Network> {
        let mut names = Vec::new();
        let mut with_ids = Vec::new();
        let mut source = None;
        let mut sinks = Vec::new();
        for (lineno, raw) in input.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kw = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let fail = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            match kw {
                "node" => match rest.as_slice() {
                    [n] => names.push(n.to_string()),
                    _ => return Err(fail("expected `node <name>`")),
                },
                "edge" => match rest.as_slice() {
                    [id, tail, head] => {
                        let id: usize =
                            id.parse().map_err(|_| fail("edge id must be an integer"))?;
                        with_ids.push((id, tail.to_string(), head.to_string()));
                    }
                    _ => return Err(fail("expected `edge <id> <tail> <head>`")),
                },
                "source" => match rest.as_slice() {
                    [n] => {
                        if source.replace(n.to_string()).is_some() {
                            return Err(fail("multiple source lines"));
                        }
                    }
                    _ => return Err(fail("expected `source <name>`")),
                },
                "sink" => match rest.as_slice() {
                    [n] => sinks.push(n.to_string()),
                    _ => return Err(fail("expected `sink <name>`")),
                },
                other => return Err(fail(&format!("unknown keyword {other:?}"))),
            }
        }
        let source = source.ok_or_else(|| Error::Parse("missing source line".into()))?;
        let edges = order_by_ids(with_ids)?;
        Network::new(names, edges, &source, &sinks)
    }
}

fn order_by_ids(mut with_ids: Vec<(usize, String, String)>) -> Result<Vec<(String, String)>> {
    with_ids.sort_by_key(|(id, _, _)| *id);
    for (expect, (id, _, _)) in with_ids.iter().enumerate() {
        if *id != expect {
            return Err(Error::Parse(format!(
                "edge ids must be dense 0..{}, problem near id {id}",
                with_ids.len().saturating_sub(1)
            )));
        }
    }
    Ok(with_ids.into_iter().map(|(_, t, h)| (t, h)).collect())
}

/// The combination network: a source feeding `n` intermediate nodes, one
/// sink per `h`-subset of intermediates, subsets in lexicographic order.
/// Source edges take ids `0..n-1`; sink edges follow in sink order.
pub fn gen_combination_network(n: usize, h: usize) -> Result<Network> {
    if h < 1 || h > n {
        return Err(Error::InvalidArgument(format!(
            "combination network needs 1 <= h <= n, got h={h}, n={n}"
        )));
    }
    let mut names = vec!["s".to_string()];
    for i in 1..=n {
        names.push(format!("u{i}"));
    }
    let mut edges = Vec::new();
    for i in 1..=n {
        edges.push(("s".to_string(), format!("u{i}")));
    }
    let mut sinks = Vec::new();
    for subset in subsets_lex(n, h) {
        let label: Vec<String> = subset.iter().map(|i| i.to_string()).collect();
        let name = if n <= 9 {
            format!("t{}", label.join(""))
        } else {
            format!("t{}", label.join("_"))
        };
        names.push(name.clone());
        for i in &subset {
            edges.push((format!("u{i}"), name.clone()));
        }
        sinks.push(name);
    }
    Network::new(names, edges, "s", &sinks)
}

/// All `h`-subsets of `1..=n` in lexicographic order.
fn subsets_lex(n: usize, h: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (1..=n).combinations(h).collect()
}

/// The result of splitting error locations into tap points: the augmented
/// network plus the bookkeeping to navigate it.
#[derive(Clone, Debug)]
pub struct TappedNetwork {
    /// Augmented network; its source is the imaginary source.
    pub net: Network,
    pub imaginary_source: NodeId,
    /// The `k` message edges from the imaginary source to the original
    /// source, ascending.
    pub message_edges: Vec<EdgeId>,
    /// One tap edge per error location, in ascending order of the tapped
    /// original edge id.
    pub tap_edges: Vec<EdgeId>,
    /// Tapped original edge id -> (first half, second half). The first
    /// half keeps the original id.
    pub split: BTreeMap<EdgeId, (EdgeId, EdgeId)>,
    /// The tapped original ids, ascending.
    pub tapped: Vec<EdgeId>,
}

/// Splits each edge in `edge_set` at an imaginary midpoint node fed from a
/// new imaginary source, and adds `k_msg` unit edges from the imaginary
/// source to the original source.
///
/// Edge id layout in the augmented network: original ids (first halves
/// keep the split edge's id), then second halves in ascending tapped-id
/// order, then tap edges, then message edges.
pub fn insert_error_tap(
    net: &Network,
    edge_set: &[EdgeId],
    k_msg: usize,
) -> Result<TappedNetwork> {
    let mut tapped: Vec<EdgeId> = edge_set.to_vec();
    tapped.sort_unstable();
    for w in tapped.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!("duplicate tapped edge {}", w[0])));
        }
    }
    if let Some(&bad) = tapped.iter().find(|&&e| e >= net.edge_count()) {
        return Err(Error::BadEdgeId(bad));
    }
    let mut names = net.names.clone();
    let mut mid = BTreeMap::new();
    for &e in &tapped {
        mid.insert(e, names.len());
        names.push(format!("__mid{e}"));
    }
    let imaginary_source = names.len();
    names.push("__imsrc".to_string());

    let name_of = |v: NodeId, names: &[String]| names[v].clone();
    let mut edge_pairs: Vec<(String, String)> = Vec::new();
    for (i, e) in net.edges.iter().enumerate() {
        if let Some(&m) = mid.get(&i) {
            edge_pairs.push((name_of(e.tail, &names), name_of(m, &names)));
        } else {
            edge_pairs.push((name_of(e.tail, &names), name_of(e.head, &names)));
        }
    }
    let mut split = BTreeMap::new();
    for &e in &tapped {
        let second = edge_pairs.len();
        split.insert(e, (e, second));
        edge_pairs.push((
            name_of(mid[&e], &names),
            name_of(net.edges[e].head, &names),
        ));
    }
    let mut tap_edges = Vec::new();
    for &e in &tapped {
        tap_edges.push(edge_pairs.len());
        edge_pairs.push((names[imaginary_source].clone(), name_of(mid[&e], &names)));
    }
    let mut message_edges = Vec::new();
    for _ in 0..k_msg {
        message_edges.push(edge_pairs.len());
        edge_pairs.push((
            names[imaginary_source].clone(),
            name_of(net.source, &names),
        ));
    }
    let sink_names: Vec<String> = net.sinks.iter().map(|&t| net.names[t].clone()).collect();
    let augmented = Network::new(names.clone(), edge_pairs, &names[imaginary_source], &sink_names)?;
    Ok(TappedNetwork {
        net: augmented,
        imaginary_source,
        message_edges,
        tap_edges,
        split,
        tapped,
    })
}

/// Deterministic max flow: depth-first augmentation exploring forward
/// residual arcs in ascending arc id, then backward arcs in ascending arc
/// id. One unit per augmentation.
pub(crate) fn max_flow(
    n_nodes: usize,
    arcs: &[(NodeId, NodeId)],
    caps: &[u32],
    s: NodeId,
    t: NodeId,
    limit: Option<usize>,
) -> (usize, Vec<u32>) {
    let mut flow = vec![0u32; arcs.len()];
    let added = continue_max_flow(n_nodes, arcs, caps, &mut flow, s, t, limit);
    (added, flow)
}

/// Augments an existing flow until `limit` more units (or no augmenting
/// path remains); returns the number of units added.
pub(crate) fn continue_max_flow(
    n_nodes: usize,
    arcs: &[(NodeId, NodeId)],
    caps: &[u32],
    flow: &mut Vec<u32>,
    s: NodeId,
    t: NodeId,
    limit: Option<usize>,
) -> usize {
    let mut total = 0usize;
    let mut out = vec![Vec::new(); n_nodes];
    let mut inn = vec![Vec::new(); n_nodes];
    for (i, &(u, v)) in arcs.iter().enumerate() {
        out[u].push(i);
        inn[v].push(i);
    }
    while limit.map_or(true, |l| total < l) {
        if !augment_once(arcs, caps, flow, &out, &inn, s, t) {
            break;
        }
        total += 1;
    }
    total
}

pub(crate) fn augment_once(
    arcs: &[(NodeId, NodeId)],
    caps: &[u32],
    flow: &mut [u32],
    out: &[Vec<usize>],
    inn: &[Vec<usize>],
    s: NodeId,
    t: NodeId,
) -> bool {
    let n = out.len();
    let mut visited = vec![false; n];
    // step = (arc id, traversed forwards)
    let mut path: Vec<(usize, bool)> = Vec::new();
    if !dfs(arcs, caps, flow, out, inn, s, t, &mut visited, &mut path) {
        return false;
    }
    for &(i, fwd) in &path {
        if fwd {
            flow[i] += 1;
        } else {
            flow[i] -= 1;
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    arcs: &[(NodeId, NodeId)],
    caps: &[u32],
    flow: &[u32],
    out: &[Vec<usize>],
    inn: &[Vec<usize>],
    u: NodeId,
    t: NodeId,
    visited: &mut [bool],
    path: &mut Vec<(usize, bool)>,
) -> bool {
    if u == t {
        return true;
    }
    visited[u] = true;
    for &i in &out[u] {
        let v = arcs[i].1;
        if !visited[v] && flow[i] < caps[i] {
            path.push((i, true));
            if dfs(arcs, caps, flow, out, inn, v, t, visited, path) {
                return true;
            }
            path.pop();
        }
    }
    for &i in &inn[u] {
        let v = arcs[i].0;
        if !visited[v] && flow[i] > 0 {
            path.push((i, false));
            if dfs(arcs, caps, flow, out, inn, v, t, visited, path) {
                return true;
            }
            path.pop();
        }
    }
    false
}

/// Splits an integral flow into unit paths: repeatedly walk from `s`
/// taking the smallest-id arc with remaining flow.
pub(crate) fn decompose_paths(
    arcs: &[(NodeId, NodeId)],
    flow: &[u32],
    s: NodeId,
    t: NodeId,
) -> Vec<Vec<usize>> {
    let mut rem = flow.to_vec();
    let mut paths = Vec::new();
    loop {
        let mut path = Vec::new();
        let mut v = s;
        let reached = loop {
            let next = arcs
                .iter()
                .enumerate()
                .find(|(i, (u, _))| *u == v && rem[*i] > 0)
                .map(|(i, _)| i);
            match next {
                None => break false,
                Some(i) => {
                    rem[i] -= 1;
                    path.push(i);
                    v = arcs[i].1;
                    if v == t {
                        break true;
                    }
                }
            }
        };
        if !reached {
            return paths;
        }
        paths.push(path);
    }
}

/// The standard 7-node, 9-edge butterfly, for tests.
#[cfg(test)]
pub(crate) fn butterfly() -> Network {
    Network::parse(
        "node s\nnode a\nnode b\nnode m\nnode w\nnode t1\nnode t2\n\
         edge 0 s a\nedge 1 s b\nedge 2 a m\nedge 3 b m\nedge 4 m w\n\
         edge 5 a t1\nedge 6 b t2\nedge 7 w t1\nedge 8 w t2\n\
         source s\nsink t1\nsink t2\n",
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_single_edge() {
        let net = Network::parse("node s\nnode t\nedge 0 s t\nsource s\nsink t\n").unwrap();
        let p = net.validate().unwrap();
        assert_eq!(p, FlowProfile { h_per_sink: vec![1], h: 1, lambda: 1 });
    }

    #[test]
    fn validate_butterfly() {
        let p = butterfly().validate().unwrap();
        assert_eq!(p.h_per_sink, vec![2, 2]);
        assert_eq!(p.h, 2);
        assert_eq!(p.lambda, 4); // s -> a -> m -> w -> t1
    }

    #[test]
    fn validate_combination_network() {
        let net = gen_combination_network(6, 3).unwrap();
        assert_eq!(net.edge_count(), 6 + 60);
        assert_eq!(net.sinks().len(), 20);
        let p = net.validate().unwrap();
        assert!(p.h_per_sink.iter().all(|&h| h == 3));
        assert_eq!(p.h, 3);
        assert_eq!(p.lambda, 2);
    }

    #[test]
    fn combination_edge_cases() {
        let small = gen_combination_network(2, 1).unwrap();
        assert_eq!(small.sinks().len(), 2);
        assert_eq!(small.edge_count(), 4);
        assert_eq!(gen_combination_network(4, 2).unwrap().sinks().len(), 6);
        assert!(gen_combination_network(3, 0).is_err());
        assert!(gen_combination_network(3, 4).is_err());
    }

    #[test]
    fn cycle_detected_with_witness() {
        let net = Network::parse(
            "node s\nnode a\nnode b\nnode t\nedge 0 s a\nedge 1 a b\nedge 2 b a\nedge 3 b t\nsource s\nsink t\n",
        )
        .unwrap();
        match net.validate() {
            Err(Error::Cycle { edge }) => assert!(edge.contains("->")),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn unreachable_sink_named() {
        let net = Network::parse(
            "node s\nnode t\nnode far\nedge 0 s t\nsource s\nsink t\nsink far\n",
        )
        .unwrap();
        match net.validate() {
            Err(Error::UnreachableSink { sink }) => assert_eq!(sink, "far"),
            other => panic!("expected unreachable sink, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_paths_on_combination_network() {
        let net = gen_combination_network(6, 3).unwrap();
        // first sink is t123 with incoming from u1, u2, u3
        let t = net.sinks()[0];
        let paths = net.edge_disjoint_paths(net.source(), t, 3).unwrap();
        assert_eq!(paths.len(), 3);
        // two-edge paths through u1, u2, u3
        assert_eq!(paths[0], vec![0, 6]);
        assert_eq!(paths[1], vec![1, 7]);
        assert_eq!(paths[2], vec![2, 8]);
        let mut all: Vec<EdgeId> = paths.concat();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 6, "paths share no edge");
    }

    #[test]
    fn disjoint_paths_edge_cases() {
        let net = Network::parse(
            "node s\nnode t\nedge 0 s t\nedge 1 s t\nsource s\nsink t\n",
        )
        .unwrap();
        assert_eq!(net.edge_disjoint_paths(0, 1, 0).unwrap(), Vec::<Vec<EdgeId>>::new());
        let paths = net.edge_disjoint_paths(0, 1, 2).unwrap();
        assert_eq!(paths, vec![vec![0], vec![1]]);
        match net.edge_disjoint_paths(0, 1, 3) {
            Err(Error::FlowInfeasible { requested: 3, max: 2 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn flow_needs_augmenting_path_reversal() {
        // the classic trap: greedy s->a->b->t blocks both routes unless the
        // augmentation can push back over (a,b)
        let net = Network::parse(
            "node s\nnode a\nnode b\nnode t\n\
             edge 0 s a\nedge 1 a b\nedge 2 b t\nedge 3 a t\nedge 4 s b\n\
             source s\nsink t\n",
        )
        .unwrap();
        let p = net.validate().unwrap();
        assert_eq!(p.h, 2);
        let paths = net.edge_disjoint_paths(net.source(), net.node_id("t").unwrap(), 2).unwrap();
        assert_eq!(paths.len(), 2);
    }

    #[test]
    fn tap_empty_set_adds_only_message_edges() {
        let net = butterfly();
        let tapped = insert_error_tap(&net, &[], 2).unwrap();
        assert_eq!(tapped.net.edge_count(), net.edge_count() + 2);
        assert_eq!(tapped.message_edges, vec![9, 10]);
        assert!(tapped.tap_edges.is_empty());
        tapped.net.validate().unwrap();
    }

    #[test]
    fn tap_single_edge_network() {
        let net = Network::parse("node s\nnode t\nedge 0 s t\nsource s\nsink t\n").unwrap();
        let tapped = insert_error_tap(&net, &[0], 1).unwrap();
        // split second half + tap edge + one message edge
        assert_eq!(tapped.net.edge_count(), 1 + 1 + 1 + 1);
        assert_eq!(tapped.net.node_count(), 2 + 2);
        assert_eq!(tapped.split[&0], (0, 1));
        tapped.net.validate().unwrap();
    }

    #[test]
    fn tap_preserves_flow() {
        let net = gen_combination_network(6, 3).unwrap();
        let tapped = insert_error_tap(&net, &[7, 31], 1).unwrap();
        assert_eq!(tapped.net.edge_count(), net.edge_count() + 2 * 2 + 1);
        let profile = tapped.net.validate().unwrap();
        assert!(profile.h >= 1);
        // original commodity still flows: 3 disjoint paths from the real
        // source to each sink
        for &t in tapped.net.sinks() {
            let src = tapped.net.node_id("s").unwrap();
            assert!(tapped.net.edge_disjoint_paths(src, t, 3).is_ok());
        }
        assert!(insert_error_tap(&net, &[66], 1).is_err());
        assert!(insert_error_tap(&net, &[3, 3], 1).is_err());
    }

    #[test]
    fn text_json_round_trip() {
        let net = butterfly();
        let text = net.to_text();
        let back = Network::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        let js = net.to_json().to_string();
        let back2 = Network::parse(&js).unwrap();
        assert_eq!(back2.to_text(), text);
    }

    #[test]
    fn parse_rejects_sparse_ids() {
        let bad = "node s\nnode t\nedge 0 s t\nedge 2 s t\nsource s\nsink t\n";
        assert!(Network::parse(bad).is_err());
    }
}
