use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use super::{Aabb, ConvexPolygon};

type Entry = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// Read-only R-tree over bounding boxes, keyed by caller-supplied ids.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    tree: RTree<Entry>,
    boxes: Vec<Aabb>,
}

impl SpatialIndex {
    /// `boxes[i]` is indexed under id `i`.
    pub fn build(boxes: Vec<Aabb>) -> Self {
        let entries = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| {
                GeomWithData::new(
                    Rectangle::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y]),
                    i,
                )
            })
            .collect();
        SpatialIndex {
            tree: RTree::bulk_load(entries),
            boxes,
        }
    }

    pub fn from_polygons<'a>(polys: impl IntoIterator<Item = &'a ConvexPolygon>) -> Self {
        SpatialIndex::build(polys.into_iter().map(|p| p.bbox()).collect())
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn bbox(&self, id: usize) -> Aabb {
        self.boxes[id]
    }

    /// Ids whose boxes touch `query` (closed), in ascending order.
    pub fn query(&self, query: &Aabb) -> Vec<usize> {
        let env = AABB::from_corners([query.min.x, query.min.y], [query.max.x, query.max.y]);
        let mut hits: Vec<usize> = self
            .tree
            .locate_in_envelope_intersecting(env)
            .map(|e| e.data)
            .collect();
        hits.sort_unstable();
        hits
    }
}
