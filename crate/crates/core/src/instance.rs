//! What an algorithm runs on: a real graph, or only its size for cost-only runs.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Size data standing in for a graph that is never materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticGraph {
    pub n: usize,
    pub m: u64,
    /// Degree sequence; an even spread of `2m` when absent.
    pub degrees: Option<Vec<u64>>,
    /// Leader eccentricity for CONGEST convergecasts.
    pub eccentricity: u64,
}

impl SyntheticGraph {
    pub fn new(n: usize, m: u64) -> Result<Self> {
        let max = n as u64 * n.saturating_sub(1) as u64 / 2;
        if m > max {
            return Err(Error::invalid("m", format!("{m} edges do not fit on {n} nodes")));
        }
        Ok(SyntheticGraph {
            n,
            m,
            degrees: None,
            eccentricity: 1,
        })
    }

    pub fn with_degrees(mut self, degrees: Vec<u64>) -> Result<Self> {
        if degrees.len() != self.n {
            return Err(Error::invalid("degrees", format!("expected {} entries", self.n)));
        }
        if degrees.iter().sum::<u64>() != 2 * self.m {
            return Err(Error::invalid("degrees", "degree sum must equal 2m"));
        }
        self.degrees = Some(degrees);
        Ok(self)
    }

    pub fn with_eccentricity(mut self, ecc: u64) -> Self {
        self.eccentricity = ecc;
        self
    }

    pub fn degrees(&self) -> Vec<u64> {
        match &self.degrees {
            Some(d) => d.clone(),
            None => {
                let n = self.n.max(1) as u64;
                let (q, r) = (2 * self.m / n, 2 * self.m % n);
                (0..self.n as u64).map(|v| q + u64::from(v < r)).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Input<'a> {
    Graph(&'a Graph),
    Synthetic(&'a SyntheticGraph),
}

impl<'a> Input<'a> {
    pub fn n(&self) -> usize {
        match self {
            Input::Graph(g) => g.n(),
            Input::Synthetic(s) => s.n,
        }
    }

    pub fn m(&self) -> u64 {
        match self {
            Input::Graph(g) => g.m() as u64,
            Input::Synthetic(s) => s.m,
        }
    }

    pub fn graph(&self) -> Option<&'a Graph> {
        match self {
            Input::Graph(g) => Some(g),
            Input::Synthetic(_) => None,
        }
    }

    pub fn is_cost_only(&self) -> bool {
        matches!(self, Input::Synthetic(_))
    }

    pub fn degrees(&self) -> Vec<u64> {
        match self {
            Input::Graph(g) => g.degrees(),
            Input::Synthetic(s) => s.degrees(),
        }
    }
}

impl<'a> From<&'a Graph> for Input<'a> {
    fn from(g: &'a Graph) -> Self {
        Input::Graph(g)
    }
}

impl<'a> From<&'a SyntheticGraph> for Input<'a> {
    fn from(s: &'a SyntheticGraph) -> Self {
        Input::Synthetic(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_degree_spread() {
        let s = SyntheticGraph::new(4, 3).unwrap();
        assert_eq!(s.degrees(), vec![2, 2, 1, 1]);
        assert!(SyntheticGraph::new(4, 7).is_err());
        assert!(s.clone().with_degrees(vec![1, 1, 1, 1]).is_err());
    }
}
