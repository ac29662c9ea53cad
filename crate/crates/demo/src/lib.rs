//! Browser bindings. Every function returns a JSON string; errors come back as `{"error": ...}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use delpezzo::certify::Tables;
use delpezzo::config::IncidenceGraph;
use delpezzo::experiment::PlaceBudget;
use delpezzo::input::parse_surface;
use delpezzo::report::analyze_input;

fn render(r: delpezzo::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

pub fn incidence_graph_value(degree: u32) -> delpezzo::Result<Value> {
    let g = IncidenceGraph::for_degree(degree)?;
    let mut edges = Vec::new();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let l = g.label(i, j);
            if l != 0 {
                edges.push(json!([i, j, l]));
            }
        }
    }
    let aut = g.automorphism_group()?;
    Ok(json!({
        "degree": degree,
        "vertices": g.vertices().iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        "edges": edges,
        "automorphism_order": aut.order().to_string(),
    }))
}

/// Exceptional classes of the degree `d` del Pezzo surface and their nonzero intersections.
#[wasm_bindgen]
pub fn incidence_graph(degree: u32) -> String {
    render(incidence_graph_value(degree))
}

pub fn analyze_surface_value(line: &str) -> delpezzo::Result<Value> {
    let input = parse_surface(line)?;
    let a = analyze_input(&input, &PlaceBudget::default(), Tables::get())?;
    Ok(serde_json::to_value(a).expect("reports serialize"))
}

/// Analyse one `p k : c1,...,c20` line.
#[wasm_bindgen]
pub fn analyze_surface(line: &str) -> String {
    render(analyze_surface_value(line))
}

/// The conjugacy classes of W(E6) acting on the 27 lines.
#[wasm_bindgen]
pub fn class_table() -> String {
    let t = Tables::get();
    json!({ "classes": t.classes.classes, "hashes": t.hashes }).to_string()
}
