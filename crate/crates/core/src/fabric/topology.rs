//! Processor interconnect description.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

pub const LINKS_PER_PROCESSOR: usize = 4;

/// One bidirectional external link between two processor instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkSpec {
    pub a: usize,
    pub a_link: u8,
    pub b: usize,
    pub b_link: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("a topology needs at least one processor")]
    Empty,
    #[error("link endpoint refers to processor {0}, but only {1} exist")]
    NoSuchProcessor(usize, usize),
    #[error("link index {0} outside 0..4")]
    NoSuchLink(u8),
    #[error("link {1} of processor {0} is used more than once")]
    DuplicateEndpoint(usize, u8),
}

/// Processor count plus link wiring. Instance 0 is the first processor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    processors: usize,
    links: Vec<LinkSpec>,
}

impl Topology {
    pub fn new(processors: usize, links: Vec<LinkSpec>) -> Result<Self, TopologyError> {
        if processors == 0 {
            return Err(TopologyError::Empty);
        }
        let mut used = BTreeSet::new();
        for l in &links {
            for (p, k) in [(l.a, l.a_link), (l.b, l.b_link)] {
                if p >= processors {
                    return Err(TopologyError::NoSuchProcessor(p, processors));
                }
                if k as usize >= LINKS_PER_PROCESSOR {
                    return Err(TopologyError::NoSuchLink(k));
                }
                if !used.insert((p, k)) {
                    return Err(TopologyError::DuplicateEndpoint(p, k));
                }
            }
        }
        Ok(Topology { processors, links })
    }

    pub fn single() -> Self {
        Topology { processors: 1, links: Vec::new() }
    }

    /// A `width` x `height` torus. Link 0 points east, 1 south, 2 west, 3 north.
    pub fn torus(width: usize, height: usize) -> Self {
        let id = |x: usize, y: usize| y * width + x;
        let mut links = Vec::new();
        for y in 0..height {
            for x in 0..width {
                if width > 1 {
                    links.push(LinkSpec { a: id(x, y), a_link: 0, b: id((x + 1) % width, y), b_link: 2 });
                }
                if height > 1 {
                    links.push(LinkSpec { a: id(x, y), a_link: 1, b: id(x, (y + 1) % height), b_link: 3 });
                }
            }
        }
        Topology::new(width * height, links).expect("torus wiring is valid")
    }

    pub fn processors(&self) -> usize {
        self.processors
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    /// Per processor, per link: the peer instance and the peer's link index.
    pub fn peers(&self) -> Vec<[Option<(usize, u8)>; LINKS_PER_PROCESSOR]> {
        let mut peers = vec![[None; LINKS_PER_PROCESSOR]; self.processors];
        for l in &self.links {
            peers[l.a][l.a_link as usize] = Some((l.b, l.b_link));
            peers[l.b][l.b_link as usize] = Some((l.a, l.a_link));
        }
        peers
    }

    /// Instances reachable from instance 0.
    pub fn reachable_from_first(&self) -> BTreeSet<usize> {
        let peers = self.peers();
        let mut seen = BTreeSet::from([0]);
        let mut queue = VecDeque::from([0]);
        while let Some(p) = queue.pop_front() {
            for (q, _) in peers[p].iter().flatten() {
                if seen.insert(*q) {
                    queue.push_back(*q);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_degrees() {
        let t = Topology::torus(4, 4);
        assert_eq!(t.processors(), 16);
        for p in t.peers() {
            assert!(p.iter().all(Option::is_some));
        }
        let t = Topology::torus(2, 2);
        assert_eq!(t.links().len(), 8);
        assert_eq!(t.peers()[0][0], Some((1, 2)));
        assert_eq!(t.peers()[0][2], Some((1, 0)));
    }

    #[test]
    fn rejects_reused_endpoint() {
        let l = vec![
            LinkSpec { a: 0, a_link: 0, b: 1, b_link: 0 },
            LinkSpec { a: 0, a_link: 0, b: 1, b_link: 1 },
        ];
        assert_eq!(Topology::new(2, l), Err(TopologyError::DuplicateEndpoint(0, 0)));
        let l = vec![LinkSpec { a: 0, a_link: 4, b: 1, b_link: 0 }];
        assert_eq!(Topology::new(2, l), Err(TopologyError::NoSuchLink(4)));
        assert_eq!(Topology::new(0, vec![]), Err(TopologyError::Empty));
    }
}
