use tracing::warn;

use super::Wall;
use crate::geometry::Barrier;

/// Splits every edge of `wall` into `ceil(edge_len / max_len)` equal
/// barriers, in vertex order. Zero-length edges are skipped.
pub fn tessellate(wall: &Wall, max_len: f64) -> Vec<Barrier> {
    assert!(max_len > 0.0, "max_len must be positive");
    let mut barriers = Vec::new();
    for (i, edge) in wall.vertices.windows(2).enumerate() {
        let (a, b) = (edge[0], edge[1]);
        let len = a.distance(b);
        if len == 0.0 {
            warn!(wall = %wall.id, edge = i, "skipping zero-length wall edge");
            continue;
        }
        let pieces = (len / max_len).ceil().max(1.0) as usize;
        let mut start = a;
        for k in 1..=pieces {
            let end = if k == pieces {
                b
            } else {
                a.lerp(b, k as f64 / pieces as f64)
            };
            barriers.push(Barrier::new(
                start,
                end,
                wall.material_id.clone(),
                wall.id.clone(),
            ));
            start = end;
        }
    }
    barriers
}
