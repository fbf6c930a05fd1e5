use super::ScalarField;
use crate::Vec2;

/// Cell centers that dominate their in-set edge neighbours (≥ all, > at
/// least one), plus the unique global maximum when the field is not
/// constant. Sorted by descending value, ties by lowest cell.
///
/// Edge neighbours, not all eight: a node above its four edge neighbours is
/// already a local maximum of the bilinear interpolant, whatever its
/// diagonals hold, and that interpolant is what the agents climb.
pub fn local_maxima(field: &ScalarField) -> Vec<Vec2> {
    let cells = field.cells();
    let g = *cells.geometry();
    let values = field.values();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if values.is_empty() || lo == hi {
        return Vec::new();
    }
    let mut found: Vec<(f64, usize)> = Vec::new();
    for (l, &c) in cells.members().iter().enumerate() {
        let v = values[l];
        let mut dominates = true;
        let mut strictly = false;
        for n in g.neighbors4(c) {
            if let Some(nv) = field.at_cell(n) {
                if nv > v {
                    dominates = false;
                    break;
                }
                if nv < v {
                    strictly = true;
                }
            }
        }
        if dominates && strictly {
            found.push((v, c));
        }
    }
    let argmax: Vec<usize> = cells
        .members()
        .iter()
        .zip(values)
        .filter(|(_, &v)| v == hi)
        .map(|(&c, _)| c)
        .collect();
    if argmax.len() == 1 && !found.iter().any(|&(_, c)| c == argmax[0]) {
        found.push((hi, argmax[0]));
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    found.into_iter().map(|(_, c)| g.center(c)).collect()
}

/// 3×3 finite-difference Hessian at a member cell; `None` when any stencil
/// cell lies outside the field's set.
pub fn discrete_hessian(field: &ScalarField, grid_idx: usize) -> Option<[[f64; 2]; 2]> {
    let g = field.cells().geometry();
    let (ix, iy) = g.coords(grid_idx);
    if ix == 0 || iy == 0 || ix + 1 >= g.nx || iy + 1 >= g.ny {
        return None;
    }
    let at = |dx: i64, dy: i64| {
        field.at_cell(g.index((ix as i64 + dx) as usize, (iy as i64 + dy) as usize))
    };
    let h2 = g.spacing * g.spacing;
    let c = at(0, 0)?;
    let fxx = (at(1, 0)? - 2.0 * c + at(-1, 0)?) / h2;
    let fyy = (at(0, 1)? - 2.0 * c + at(0, -1)?) / h2;
    let fxy = (at(1, 1)? - at(1, -1)? - at(-1, 1)? + at(-1, -1)?) / (4.0 * h2);
    Some([[fxx, fxy], [fxy, fyy]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_region, Rect, RegionSpec};

    fn gaussian(p: Vec2, c: Vec2, w: f64) -> f64 {
        (-(p.dist_sq(c)) / w).exp()
    }

    #[test]
    fn single_peak() {
        let cells = build_region(&RegionSpec { outer: Rect::new(0.0, 0.0, 4.0, 4.0), holes: vec![], spacing: 0.1 })
            .unwrap()
            .cells()
            .clone();
        let f = ScalarField::from_fn(cells, |p| gaussian(p, Vec2::new(1.52, 2.68), 1.0));
        let maxima = local_maxima(&f);
        assert_eq!(maxima.len(), 1);
        assert!(maxima[0].dist(Vec2::new(1.55, 2.65)) < 1e-9);
    }

    #[test]
    fn constant_field_has_no_maxima() {
        let cells = build_region(&RegionSpec { outer: Rect::new(0.0, 0.0, 1.0, 1.0), holes: vec![], spacing: 0.1 })
            .unwrap()
            .cells()
            .clone();
        assert!(local_maxima(&ScalarField::constant(cells, 2.0)).is_empty());
    }
}
