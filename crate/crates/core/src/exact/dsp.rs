use std::collections::VecDeque;

use crate::exact::dag::LayeredDag;

/// Which way distances are measured: from the source along arcs, or from the
/// sink against them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Shortest-path distances over a growing subset of a chain DAG's arcs.
///
/// Arcs are only ever added, so distances only decrease. An insertion
/// relaxes the new arc and then propagates in FIFO order through the active
/// arcs leaving every node whose distance dropped. In a layered DAG the queue
/// visits layers in order, so each node is expanded at most once per insertion.
#[derive(Debug, Clone)]
pub struct DistanceState {
    direction: Direction,
    dist: Vec<f64>,
    active: Vec<bool>,
    // active arcs leaving each node in the traversal direction
    adjacency: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    marked: Vec<bool>,
    relaxations: u64,
}

impl DistanceState {
    /// No active arcs; distance 0 at the origin (source or sink), infinity elsewhere.
    pub fn new(dag: &LayeredDag, direction: Direction) -> Self {
        let n = dag.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let origin = match direction {
            Direction::Forward => dag.source(),
            Direction::Backward => dag.sink(),
        };
        dist[origin] = 0.0;
        Self {
            direction,
            dist,
            active: vec![false; dag.arc_count()],
            adjacency: vec![Vec::new(); n],
            queue: VecDeque::new(),
            queued: vec![false; n],
            marked: vec![false; n],
            relaxations: 0,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn distance(&self, w: usize) -> f64 {
        self.dist[w]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn is_active(&self, arc: usize) -> bool {
        self.active[arc]
    }

    pub fn active_arcs(&self) -> &[bool] {
        &self.active
    }

    /// Arc relaxations performed so far, counting the inserted arc itself.
    pub fn relaxations(&self) -> u64 {
        self.relaxations
    }

    /// Activates `arc` and returns the nodes whose distance strictly decreased.
    pub fn insert(&mut self, dag: &LayeredDag, arc: usize) -> Vec<usize> {
        let mut changed = Vec::new();
        self.insert_into(dag, arc, &mut changed);
        changed
    }

    /// As [`insert`](Self::insert), appending the decreased nodes to `changed`
    /// (after clearing it).
    pub fn insert_into(&mut self, dag: &LayeredDag, arc: usize, changed: &mut Vec<usize>) {
        changed.clear();
        if self.active[arc] {
            return;
        }
        self.active[arc] = true;
        let (from, _) = self.ends(dag, arc);
        self.adjacency[from].push(arc);

        self.relax(dag, arc, changed);
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
            for i in 0..self.adjacency[v].len() {
                let a = self.adjacency[v][i];
                self.relax(dag, a, changed);
            }
        }
        for &w in changed.iter() {
            self.marked[w] = false;
        }
    }

    #[inline]
    fn ends(&self, dag: &LayeredDag, arc: usize) -> (usize, usize) {
        let a = dag.arc(arc);
        match self.direction {
            Direction::Forward => (a.tail, a.head),
            Direction::Backward => (a.head, a.tail),
        }
    }

    #[inline]
    fn relax(&mut self, dag: &LayeredDag, arc: usize, changed: &mut Vec<usize>) {
        self.relaxations += 1;
        let (p, q) = self.ends(dag, arc);
        let cand = self.dist[p] + dag.arc(arc).sigma;
        if cand >= self.dist[q] {
            return;
        }
        self.dist[q] = cand;
        if !self.marked[q] {
            self.marked[q] = true;
            changed.push(q);
        }
        if !self.queued[q] {
            self.queued[q] = true;
            self.queue.push_back(q);
        }
    }
}
