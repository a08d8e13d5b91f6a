//! Machine-readable analysis reports. Every numeric claim carries a
//! certification tag (`exact`, `enclosure(width)`, or `empirical(horizon)`),
//! and serialisation is deterministic: the same input yields byte-identical
//! output.

use serde::{Deserialize, Serialize};

use crate::circle_lift::{
    is_combed_at, rotation_interval_combed, CombedStatus, LiftError, RhoResult,
};
use crate::markov_graph::{LoopWitness, MarkovGraph, RotationSet};
use crate::markov_map::MarkovMap;
use crate::orbit_engine::PeriodSearch;
use crate::rational::{rational_to_string, Rational};

/// Renders a rho result value plus its certification tag.
fn rho_strings(r: &RhoResult) -> (String, String) {
    match r {
        RhoResult::Exact(v) => (rational_to_string(v), "exact".to_string()),
        RhoResult::Enclosure { lo, hi, iterates } => {
            let width = rational_to_string(&(hi - lo));
            (
                format!("[{}, {}]", rational_to_string(lo), rational_to_string(hi)),
                format!("enclosure({width}) from {iterates} iterates"),
            )
        }
    }
}

/// The rotation interval with its endpoint witnesses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationReport {
    pub min: String,
    pub max: String,
    /// Node names along the loop attaining the minimum mean.
    pub min_witness: Vec<String>,
    pub max_witness: Vec<String>,
    pub certification: String,
    /// Present when the graph is not strongly connected: the interval is
    /// only the convex hull of the per-component rotation sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

/// Combedness verdict at one branching point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombednessReport {
    pub coordinate: String,
    pub status: String,
}

/// Cross-check of the rotation interval via the monotone envelopes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombedCrossCheck {
    pub lower: String,
    pub lower_certification: String,
    pub upper: String,
    pub upper_certification: String,
    pub matches_loop_computation: Option<bool>,
}

/// Full analysis report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub model: String,
    pub transitive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationReport>,
    pub combedness: Vec<CombednessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combed_rotation: Option<CombedCrossCheck>,
}

/// Period-search report for a rotation class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodsReport {
    pub model: String,
    pub rotation: String,
    pub n_max: u64,
    pub periods: Vec<u64>,
    /// True when the search was exhaustive; otherwise the period list is a
    /// certified subset only.
    pub complete: bool,
    pub certification: String,
    pub expansions: u64,
}

fn witness_names(graph: &MarkovGraph, w: &LoopWitness) -> Vec<String> {
    w.nodes
        .iter()
        .map(|&v| graph.node_name(v).to_string())
        .collect()
}

fn status_name(s: CombedStatus) -> &'static str {
    match s {
        CombedStatus::Combed => "combed",
        CombedStatus::LeftOnly => "left-combed only",
        CombedStatus::RightOnly => "right-combed only",
        CombedStatus::Neither => "not combed",
    }
}

/// Builds the full analysis report for a map.
pub fn analyze(name: &str, map: &MarkovMap, qmax: u32, horizon: u32) -> AnalyzeReport {
    let graph = MarkovGraph::from_map(map);
    let rot = graph.rotation_set();
    let rotation = match &rot {
        RotationSet::NoLoop => None,
        RotationSet::Interval {
            min,
            max,
            min_witness,
            max_witness,
            transitive,
        } => Some(RotationReport {
            min: rational_to_string(min),
            max: rational_to_string(max),
            min_witness: witness_names(&graph, min_witness),
            max_witness: witness_names(&graph, max_witness),
            certification: "exact".to_string(),
            caveat: if *transitive {
                None
            } else {
                Some(
                    "graph not strongly connected: interval is the convex hull \
                     of per-component rotation sets"
                        .to_string(),
                )
            },
        }),
    };
    let transitive = graph.is_strongly_connected();
    let l = map.circle_restriction();
    let branches = map.branch_value_ranges();
    let combedness: Vec<CombednessReport> = branches
        .keys()
        .map(|z| CombednessReport {
            coordinate: rational_to_string(z),
            status: status_name(is_combed_at(&l, &branches, z)).to_string(),
        })
        .collect();
    let combed_rotation = match rotation_interval_combed(&l, &branches, qmax, horizon) {
        Ok(cr) => {
            let (lower, lower_certification) = rho_strings(&cr.lower);
            let (upper, upper_certification) = rho_strings(&cr.upper);
            let matches = match (&rot, &cr.lower, &cr.upper) {
                (
                    RotationSet::Interval { min, max, .. },
                    RhoResult::Exact(lo),
                    RhoResult::Exact(hi),
                ) => Some(lo == min && hi == max),
                _ => None,
            };
            Some(CombedCrossCheck {
                lower,
                lower_certification,
                upper,
                upper_certification,
                matches_loop_computation: matches,
            })
        }
        Err(LiftError::NotCombed(_)) => None,
        Err(_) => None,
    };
    AnalyzeReport {
        model: name.to_string(),
        transitive,
        rotation,
        combedness,
        combed_rotation,
    }
}

/// Builds the periods report for rotation number `p/q`.
pub fn periods(
    name: &str,
    p: i64,
    q: u64,
    n_max: u64,
    search: &PeriodSearch,
) -> PeriodsReport {
    PeriodsReport {
        model: name.to_string(),
        rotation: format!("{p}/{q}"),
        n_max,
        periods: search.periods.iter().copied().collect(),
        complete: search.complete,
        certification: if search.complete {
            "exact".to_string()
        } else {
            "partial (budget exceeded): listed periods are certified, absences are not"
                .to_string()
        },
        expansions: search.expansions,
    }
}

/// Renders the analysis report as plain text.
pub fn analyze_text(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("model: {}\n", r.model));
    s.push_str(&format!("transitive: {}\n", r.transitive));
    match &r.rotation {
        None => s.push_str("rotation set: no loop in the Markov graph\n"),
        Some(rot) => {
            s.push_str(&format!(
                "rotation set: [{}, {}] ({})\n",
                rot.min, rot.max, rot.certification
            ));
            s.push_str(&format!(
                "  min witness loop: {}\n",
                rot.min_witness.join(" -> ")
            ));
            s.push_str(&format!(
                "  max witness loop: {}\n",
                rot.max_witness.join(" -> ")
            ));
            if let Some(c) = &rot.caveat {
                s.push_str(&format!("  caveat: {c}\n"));
            }
        }
    }
    for c in &r.combedness {
        s.push_str(&format!(
            "combedness at {}: {}\n",
            c.coordinate, c.status
        ));
    }
    if let Some(cc) = &r.combed_rotation {
        s.push_str(&format!(
            "envelope rotation interval: lower {} ({}), upper {} ({})\n",
            cc.lower, cc.lower_certification, cc.upper, cc.upper_certification
        ));
        if let Some(m) = cc.matches_loop_computation {
            s.push_str(&format!("  matches loop computation: {m}\n"));
        }
    } else {
        s.push_str("envelope rotation interval: unavailable (map not combed)\n");
    }
    s
}

/// Renders the periods report as plain text.
pub fn periods_text(r: &PeriodsReport) -> String {
    let list = r
        .periods
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "model: {}\nrotation: {}\nperiods up to {}: {{{}}}\ncertification: {}\n",
        r.model, r.rotation, r.n_max, list, r.certification
    )
}

/// Helper: format a rational and keep exactness documented at call sites.
pub fn format_rational(x: &Rational) -> String {
    rational_to_string(x)
}
