//! Zone-graph export: the set of distinct extrapolated symbolic states and
//! the edges between them, as DOT or JSON.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{fingerprint, initial_state, succ, Caps, ExplorationStats, Termination};
use crate::extrapolation::{extrapolate, ClockBounds};
use crate::model::Pta;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphNode {
    pub id: usize,
    pub location: String,
    pub zone: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub action: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphDoc {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub stats: ExplorationStats,
    pub termination: Termination,
}

/// Explores the extrapolated symbolic graph breadth-first, merging states
/// with the same location and equal zones, and renders it.
///
/// Unlike the synthesis traversals this deduplicates globally: the output
/// is the reachable quotient graph, not the reachability tree.
pub fn export_graph(a: &Pta, bounds: &ClockBounds, caps: Caps, format: GraphFormat) -> String {
    let mut stats = ExplorationStats::new();
    let mut states = Vec::new();
    let mut prints = Vec::new();
    let mut edges: BTreeSet<(usize, String, usize)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();

    if let Some(root) = initial_state(a) {
        prints.push(fingerprint(&root.zone));
        states.push(root);
        stats.states_explored = 1;
        stats.max_depth = 1;
        queue.push_back((0, 1));
    }

    'bfs: while let Some((id, depth)) = queue.pop_front() {
        if caps.depth_hit(depth) {
            stats.termination = Termination::CapReached;
            continue;
        }
        let state = states[id].clone();
        for e in a.edges_from(state.location) {
            let Some(s) = succ(a, &state, e) else { continue };
            let members = extrapolate(&s.zone, bounds);
            stats.split_states += members.len();
            for zone in members.members() {
                let fp = fingerprint(zone);
                let found = states.iter().enumerate().position(|(i, st)| {
                    st.location == s.location && prints[i] == fp && st.zone.equal(zone)
                });
                let to = match found {
                    Some(i) => i,
                    None => {
                        if caps.states_hit(states.len()) {
                            stats.termination = Termination::CapReached;
                            break 'bfs;
                        }
                        let i = states.len();
                        states.push(super::SymbolicState {
                            location: s.location,
                            zone: zone.clone(),
                        });
                        prints.push(fp);
                        stats.states_explored += 1;
                        stats.max_depth = stats.max_depth.max(depth + 1);
                        queue.push_back((i, depth + 1));
                        i
                    }
                };
                edges.insert((id, e.action.clone(), to));
            }
        }
    }

    let doc = GraphDoc {
        nodes: states
            .iter()
            .enumerate()
            .map(|(id, s)| GraphNode {
                id,
                location: a.locations[s.location.0].name.clone(),
                zone: s.zone.render(),
            })
            .collect(),
        edges: edges
            .into_iter()
            .map(|(from, action, to)| GraphEdge { from, to, action })
            .collect(),
        termination: stats.termination,
        stats,
    };
    match format {
        GraphFormat::Json => serde_json::to_string_pretty(&doc).expect("graph serializes"),
        GraphFormat::Dot => render_dot(&doc),
    }
}

fn render_dot(doc: &GraphDoc) -> String {
    let mut out = String::from("digraph zone_graph {\n  rankdir=TB;\n  node [shape=box];\n");
    for n in &doc.nodes {
        out.push_str(&format!(
            "  s{} [label=\"{}\\n{}\"];\n",
            n.id,
            escape(&n.location),
            escape(&n.zone)
        ));
    }
    for e in &doc.edges {
        out.push_str(&format!(
            "  s{} -> s{} [label=\"{}\"];\n",
            e.from,
            e.to,
            escape(&e.action)
        ));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::{select_mode, RequestedMode};
    use crate::model::parse_model;

    #[test]
    fn single_location_edgeless_model_has_one_node() {
        let a = parse_model("clocks x;\nloc l0 {}\ninit l0;\n").unwrap();
        let sel = select_mode(&a, RequestedMode::Auto);
        let doc = export_graph(&a, &sel.bounds, Caps::unlimited(), GraphFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(parsed["nodes"].as_array().unwrap().len(), 1);
        assert_eq!(parsed["edges"].as_array().unwrap().len(), 0);
        assert_eq!(parsed["termination"], serde_json::json!("complete"));
    }

    #[test]
    fn uncapped_chain_is_cut_by_the_state_cap() {
        let a = parse_model(include_str!("../../../../fixtures/paper/fig1a.pta")).unwrap();
        let sel = select_mode(&a, RequestedMode::None);
        let caps = Caps { max_states: 10, max_depth: 0 };
        let doc = export_graph(&a, &sel.bounds, caps, GraphFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert!(parsed["nodes"].as_array().unwrap().len() >= 10);
        assert_eq!(parsed["termination"], serde_json::json!("cap_reached"));
    }

    #[test]
    fn dot_output_shape() {
        let a = parse_model("clocks x;\nloc l0 { on a goto l0; }\ninit l0;\n").unwrap();
        let sel = select_mode(&a, RequestedMode::None);
        let dot = export_graph(&a, &sel.bounds, Caps::unlimited(), GraphFormat::Dot);
        assert!(dot.starts_with("digraph zone_graph {"));
        assert!(dot.contains("s0 [label=\"l0\\n"));
        assert!(dot.contains("s0 -> s0 [label=\"a\"];"));
        assert!(dot.trim_end().ends_with('}'));
    }
}
