use serde::Serialize;

use super::DistSelectParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    /// Transfer of a CCZ state from a factory to the consumer.
    MagicPrep,
    /// Teleportation corrections after the CCZ state arrives.
    Clifford,
    /// Controlled Pauli on the shared Pauli target qubits.
    PauliOnTarget,
    /// Measurement-based uncomputation of the Toffoli.
    Measurement,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperationNode {
    pub id: usize,
    pub sub_circuit: u32,
    pub kind: OperationKind,
    pub duration: u64,
    pub ancestors: Vec<usize>,
}

/// Operation DAG; node ids are indices into `nodes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dag {
    pub nodes: Vec<OperationNode>,
    descendants: Vec<Vec<usize>>,
}

impl Dag {
    pub fn from_nodes(nodes: Vec<OperationNode>) -> Self {
        let mut descendants = vec![Vec::new(); nodes.len()];
        for node in &nodes {
            for &a in &node.ancestors {
                descendants[a].push(node.id);
            }
        }
        Dag { nodes, descendants }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn descendants(&self, id: usize) -> &[usize] {
        &self.descendants[id]
    }

    pub fn count(&self, kind: OperationKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut pending: Vec<usize> = self.nodes.iter().map(|n| n.ancestors.len()).collect();
        let mut order: Vec<usize> = (0..self.len()).filter(|&i| pending[i] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let id = order[head];
            head += 1;
            for &child in &self.descendants[id] {
                pending[child] -= 1;
                if pending[child] == 0 {
                    order.push(child);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    /// Number of nodes on the longest dependency chain.
    pub fn longest_chain(&self) -> usize {
        let Some(order) = self.topological_order() else {
            return 0;
        };
        let mut depth = vec![0usize; self.len()];
        for id in order {
            depth[id] = 1 + self.nodes[id].ancestors.iter().map(|&a| depth[a]).max().unwrap_or(0);
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

/// Builds `M` independent chains of `L / M` iterations. Each iteration is
/// magic_prep, clifford, pauli_on_target, measurement; the first node of an
/// iteration depends on the last node of the previous one.
pub fn build_dag(params: &DistSelectParams) -> Dag {
    let per_circuit = params.l / u64::from(params.m);
    let template = [
        (OperationKind::MagicPrep, params.d),
        (OperationKind::Clifford, params.clifford_cycles()),
        (OperationKind::PauliOnTarget, 2 * params.d),
        (OperationKind::Measurement, params.measurement_cycles()),
    ];
    let mut nodes = Vec::with_capacity(params.l as usize * template.len());
    for sub_circuit in 0..params.m {
        let mut previous = None;
        for _ in 0..per_circuit {
            for &(kind, duration) in &template {
                let id = nodes.len();
                nodes.push(OperationNode {
                    id,
                    sub_circuit,
                    kind,
                    duration,
                    ancestors: previous.into_iter().collect(),
                });
                previous = Some(id);
            }
        }
    }
    Dag::from_nodes(nodes)
}
