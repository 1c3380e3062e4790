use std::cmp::Ordering;

use crate::geometry::Point2;

#[derive(Debug, Clone)]
struct Node {
    /// Index into the original point list.
    index: usize,
    /// Splitting axis: 0 for x, 1 for y.
    axis: u8,
    left: Option<usize>,
    right: Option<usize>,
}

/// Static 2D k-d tree over a point list. Nearest-neighbor queries are exact
/// and break distance ties towards the lowest point index.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point2>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

fn coord(p: &Point2, axis: u8) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Point2]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        let mut order: Vec<usize> = (0..points.len()).collect();
        tree.root = tree.build(&mut order, 0);
        tree
    }

    fn build(&mut self, order: &mut [usize], depth: usize) -> Option<usize> {
        if order.is_empty() {
            return None;
        }
        let axis = (depth % 2) as u8;
        let points = &self.points;
        order.sort_by(|&a, &b| {
            coord(&points[a], axis)
                .total_cmp(&coord(&points[b], axis))
                .then(a.cmp(&b))
        });
        let mid = order.len() / 2;
        let index = order[mid];
        let (lower, rest) = order.split_at_mut(mid);
        let upper = &mut rest[1..];
        let left = self.build(lower, depth + 1);
        let right = self.build(upper, depth + 1);
        self.nodes.push(Node {
            index,
            axis,
            left,
            right,
        });
        Some(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index of the point closest to `query`, or `None` for an empty tree.
    pub fn nearest(&self, query: Point2) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        if let Some(root) = self.root {
            self.search(root, query, &mut best);
        }
        best.map(|(_, i)| i)
    }

    fn search(&self, node_id: usize, query: Point2, best: &mut Option<(f64, usize)>) {
        let node = &self.nodes[node_id];
        let p = self.points[node.index];
        let d2 = p.distance_squared(&query);
        let better = match *best {
            None => true,
            Some((bd, bi)) => match d2.total_cmp(&bd) {
                Ordering::Less => true,
                Ordering::Equal => node.index < bi,
                Ordering::Greater => false,
            },
        };
        if better {
            *best = Some((d2, node.index));
        }

        let diff = coord(&query, node.axis) - coord(&p, node.axis);
        // Points equal to the split value may sit on either side.
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(n) = near {
            self.search(n, query, best);
        }
        if let Some(f) = far {
            let bd = best.map_or(f64::INFINITY, |(d, _)| d);
            if diff * diff <= bd {
                self.search(f, query, best);
            }
        }
    }
}
