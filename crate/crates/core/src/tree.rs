//! Arena-backed search tree shared by the single- and multi-objective searches.
//!
//! Nodes are never removed. Advancing the episode re-roots the tree at a
//! child, so statistics gathered under earlier roots stay available for the
//! visit log.

use crate::feature_set::FeatureSet;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node<S> {
    pub acquired: FeatureSet,
    pub action_in: Option<usize>,
    pub parent: Option<NodeId>,
    /// Ascending by action.
    pub children: Vec<NodeId>,
    pub visits: u64,
    pub stats: S,
}

impl<S> Node<S> {
    pub fn depth(&self) -> usize {
        self.acquired.len()
    }
}

#[derive(Debug, Clone)]
pub struct Tree<S> {
    nodes: Vec<Node<S>>,
    root: NodeId,
    feature_count: usize,
}

impl<S: Default> Tree<S> {
    /// Tree with a single root node for `acquired`.
    pub fn new(acquired: FeatureSet, feature_count: usize) -> Self {
        Tree {
            nodes: vec![Node {
                acquired,
                action_in: None,
                parent: None,
                children: Vec::new(),
                visits: 0,
                stats: S::default(),
            }],
            root: 0,
            feature_count,
        }
    }

    /// Adds one child per unacquired feature. Returns the new children, which
    /// is empty when `id` is terminal or already expanded.
    pub fn expand(&mut self, id: NodeId) -> Vec<NodeId> {
        if !self.nodes[id].children.is_empty() {
            return Vec::new();
        }
        let parent = self.nodes[id].acquired;
        let mut created = Vec::new();
        for action in parent.missing(self.feature_count) {
            let child = self.nodes.len();
            self.nodes.push(Node {
                acquired: parent.with(action),
                action_in: Some(action),
                parent: Some(id),
                children: Vec::new(),
                visits: 0,
                stats: S::default(),
            });
            created.push(child);
        }
        self.nodes[id].children = created.clone();
        created
    }
}

impl<S> Tree<S> {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn node(&self, id: NodeId) -> &Node<S> {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node<S> {
        &mut self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node<S>)> {
        self.nodes.iter().enumerate()
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        self.nodes[id].acquired.len() == self.feature_count
    }

    pub fn child(&self, id: NodeId, action: usize) -> Option<NodeId> {
        self.nodes[id].children.iter().copied().find(|&c| self.nodes[c].action_in == Some(action))
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    /// Makes `id` the root. It must be a child of the current root.
    pub fn reroot(&mut self, id: NodeId) {
        debug_assert_eq!(self.nodes[id].parent, Some(self.root));
        self.root = id;
    }

    /// Nodes from `leaf` up to and including the current root, leaf first.
    pub fn path_to_root(&self, leaf: NodeId) -> Vec<NodeId> {
        let mut path = vec![leaf];
        let mut at = leaf;
        while at != self.root {
            at = self.nodes[at].parent.expect("leaf lies below the root");
            path.push(at);
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_is_idempotent() {
        let mut t: Tree<f64> = Tree::new(FeatureSet::from_indices([1]), 4);
        assert_eq!(t.expand(0).len(), 3);
        assert!(t.expand(0).is_empty());
        assert_eq!(t.children(0).len(), 3);
        let actions: Vec<_> = t.children(0).iter().map(|&c| t.node(c).action_in.unwrap()).collect();
        assert_eq!(actions, vec![0, 2, 3]);
    }

    #[test]
    fn root_of_d_features_has_d_children() {
        let mut t: Tree<f64> = Tree::new(FeatureSet::empty(), 5);
        assert_eq!(t.expand(0).len(), 5);
        let terminal = FeatureSet::from_indices(0..5);
        let mut leaf: Tree<f64> = Tree::new(terminal, 5);
        assert!(leaf.is_terminal(0));
        assert!(leaf.expand(0).is_empty());
    }

    #[test]
    fn path_stops_at_current_root() {
        let mut t: Tree<f64> = Tree::new(FeatureSet::empty(), 3);
        t.expand(0);
        let c = t.child(0, 2).unwrap();
        t.expand(c);
        let g = t.child(c, 0).unwrap();
        assert_eq!(t.path_to_root(g), vec![g, c, 0]);
        t.reroot(c);
        assert_eq!(t.path_to_root(g), vec![g, c]);
        assert_eq!(t.node(g).depth(), 2);
    }
}
