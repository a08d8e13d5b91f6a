//! Model files: a JSON-compatible schema describing a lifted graph and an
//! affine Markov map on it, with all numbers written as exact rational
//! strings (`"p"` or `"p/q"`).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lifted_graph::{Edge, EdgeId, LiftedGraph, Node, NodeId, ValidationError};
use crate::markov_map::{ChainEntry, MapError, MarkovMap};
use crate::rational::parse_rational;

/// Errors raised while loading a model file.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("in {context}: bad rational literal: {message}")]
    BadRational { context: String, message: String },
    #[error("unknown node name {0:?}")]
    UnknownNode(String),
    #[error("unknown edge name {0:?}")]
    UnknownEdge(String),
    #[error("graph validation failed: {0}")]
    Graph(#[from] ValidationError),
    #[error("map validation failed: {0}")]
    Map(#[from] MapError),
    #[error("edge {0:?} has no image chain")]
    MissingChain(String),
}

/// A node of the model: spine nodes carry a coordinate in `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<String>,
}

/// An edge of the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeModel {
    pub name: String,
    pub from: String,
    pub to: String,
    pub length: String,
    #[serde(default)]
    pub on_spine: bool,
}

/// One entry of an image chain: a whole edge translated by `shift`,
/// traversed backwards when `reversed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainEntryModel {
    pub edge: String,
    #[serde(default)]
    pub shift: i64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
}

/// The full model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub nodes: Vec<NodeModel>,
    pub edges: Vec<EdgeModel>,
    /// Image chain per edge name.
    pub images: BTreeMap<String, Vec<ChainEntryModel>>,
}

impl ModelFile {
    /// Parses a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Serialises back to pretty JSON (deterministic: maps are ordered).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialisation cannot fail")
    }

    /// Builds the validated graph and map.
    pub fn build(&self) -> Result<(Arc<LiftedGraph>, MarkovMap), ModelError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let coord = match &n.coord {
                Some(text) => {
                    Some(parse_rational(text).map_err(|message| ModelError::BadRational {
                        context: format!("node {:?}", n.name),
                        message,
                    })?)
                }
                None => None,
            };
            nodes.push(Node {
                name: n.name.clone(),
                spine_coord: coord,
            });
        }
        let node_id = |name: &str| -> Result<NodeId, ModelError> {
            self.nodes
                .iter()
                .position(|n| n.name == name)
                
                .ok_or_else(|| ModelError::UnknownNode(name.to_string()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let length = parse_rational(&e.length).map_err(|message| ModelError::BadRational {
                context: format!("edge {:?}", e.name),
                message,
            })?;
            edges.push(Edge {
                name: e.name.clone(),
                from: node_id(&e.from)?,
                to: node_id(&e.to)?,
                length,
                on_spine: e.on_spine,
            });
        }
        let graph = Arc::new(LiftedGraph::new(nodes, edges)?);
        let edge_id = |name: &str| -> Result<EdgeId, ModelError> {
            graph
                .edge_by_name(name)
                .ok_or_else(|| ModelError::UnknownEdge(name.to_string()))
        };
        let mut images = vec![Vec::new(); graph.edges().len()];
        for (edge_name, chain) in &self.images {
            let e = edge_id(edge_name)?;
            images[e] = chain
                .iter()
                .map(|c| {
                    Ok(ChainEntry {
                        edge: edge_id(&c.edge)?,
                        shift: c.shift,
                        reversed: c.reversed,
                    })
                })
                .collect::<Result<Vec<_>, ModelError>>()?;
        }
        for (i, chain) in images.iter().enumerate() {
            if chain.is_empty() {
                return Err(ModelError::MissingChain(graph.edges()[i].name.clone()));
            }
        }
        let map = MarkovMap::new(Arc::clone(&graph), images)?;
        Ok((graph, map))
    }
}
