//! From high-probability cell clusters to generalized opening rectangles.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::building::OpeningKind;
use crate::error::{Error, Result};

pub type CellIndex = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub rows: usize,
    pub cols: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(rows: usize, cols: usize) -> Self {
        BinaryMask {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_cells(
        rows: usize,
        cols: usize,
        cells: impl IntoIterator<Item = CellIndex>,
    ) -> Self {
        let mut m = BinaryMask::new(rows, cols);
        for (r, c) in cells {
            m.set(r, c, true);
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    /// Out-of-range reads are background.
    fn get_signed(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.rows
            && (col as usize) < self.cols
            && self.get(row as usize, col as usize)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let cols = self.cols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / cols, i % cols))
    }

    /// 8-connected components, each sorted, in order of their first cell.
    pub fn components8(&self) -> Vec<Vec<CellIndex>> {
        let mut seen = vec![false; self.bits.len()];
        let mut out = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                let (r, c) = (i / self.cols, i % self.cols);
                comp.push((r, c));
                for dr in -1isize..=1 {
                    for dc in -1isize..=1 {
                        let (nr, nc) = (r as isize + dr, c as isize + dc);
                        if self.get_signed(nr, nc) {
                            let j = nr as usize * self.cols + nc as usize;
                            if !seen[j] {
                                seen[j] = true;
                                queue.push_back(j);
                            }
                        }
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn filter_window(&self, half: usize, keep: impl Fn(usize) -> bool) -> BinaryMask {
        let h = half as isize;
        let mut out = BinaryMask::new(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let mut n = 0;
                for dr in -h..=h {
                    for dc in -h..=h {
                        n += self.get_signed(r as isize + dr, c as isize + dc) as usize;
                    }
                }
                out.set(r, c, keep(n));
            }
        }
        out
    }

    /// Erosion by a `side × side` square; outside the raster is background.
    pub fn erode(&self, side: usize) -> BinaryMask {
        let full = side * side;
        self.filter_window(side / 2, |n| n == full)
    }

    pub fn dilate(&self, side: usize) -> BinaryMask {
        self.filter_window(side / 2, |n| n > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    /// Minimum opening area, m².
    pub b_s: f64,
    pub r_cp_t: f64,
    /// Upper and lower rectangularity percentiles.
    pub pe_up: f64,
    pub pe_lo: f64,
    pub n_min: usize,
    /// Side of the square structuring element, cells.
    pub structuring_element: usize,
}

impl Default for ShapeParams {
    fn default() -> Self {
        ShapeParams {
            b_s: 0.3,
            r_cp_t: 0.1,
            pe_up: 95.0,
            pe_lo: 5.0,
            n_min: 5,
            structuring_element: 3,
        }
    }
}

impl ShapeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_s >= 0.0 && self.b_s.is_finite()) {
            return Err(Error::Config(format!(
                "shape.b_s must be non-negative, got {}",
                self.b_s
            )));
        }
        if !(self.r_cp_t >= 0.0) {
            return Err(Error::Config(format!(
                "shape.r_cp_t must be non-negative, got {}",
                self.r_cp_t
            )));
        }
        if !(0.0..=100.0).contains(&self.pe_lo)
            || !(0.0..=100.0).contains(&self.pe_up)
            || self.pe_lo > self.pe_up
        {
            return Err(Error::Config(format!(
                "shape.pe_lo/pe_up must satisfy 0 <= pe_lo <= pe_up <= 100, got {} / {}",
                self.pe_lo, self.pe_up
            )));
        }
        if self.structuring_element == 0 || self.structuring_element % 2 == 0 {
            return Err(Error::Config(format!(
                "shape.structuring_element must be odd and positive, got {}",
                self.structuring_element
            )));
        }
        Ok(())
    }
}

/// A cluster of façade cells awaiting generalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCluster {
    pub cells: Vec<CellIndex>,
    pub kind: OpeningKind,
    pub mean_posterior: f64,
}

/// Axis-aligned box in façade-plane meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub u_min: f64,
    pub v_min: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min
            && u <= self.u_min + self.width
            && v >= self.v_min
            && v <= self.v_min + self.height
    }

    pub fn intersection_area(&self, o: &BBox) -> f64 {
        let w = (self.u_min + self.width).min(o.u_min + o.width) - self.u_min.max(o.u_min);
        let h = (self.v_min + self.height).min(o.v_min + o.height) - self.v_min.max(o.v_min);
        w.max(0.0) * h.max(0.0)
    }

    pub fn iou(&self, o: &BBox) -> f64 {
        let i = self.intersection_area(o);
        let u = self.area() + o.area() - i;
        if u <= 0.0 {
            0.0
        } else {
            i / u
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpeningCandidate {
    pub facade: String,
    pub kind: OpeningKind,
    pub cells: Vec<CellIndex>,
    pub bbox: BBox,
    pub area: f64,
    pub completeness: f64,
    pub rectangularity: f64,
    pub mean_posterior: f64,
}

/// Ratio of cluster area to enclosed-hole area; holes are background cells
/// not reachable from outside the cluster's bounding box through
/// 4-connected background. No holes gives `+∞`.
pub fn completeness_index(cells: &[CellIndex]) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let r0 = cells.iter().map(|c| c.0).min().unwrap();
    let c0 = cells.iter().map(|c| c.1).min().unwrap();
    let r1 = cells.iter().map(|c| c.0).max().unwrap();
    let c1 = cells.iter().map(|c| c.1).max().unwrap();
    // Local raster with a one-cell background frame.
    let (h, w) = (r1 - r0 + 3, c1 - c0 + 3);
    let local = BinaryMask::from_cells(h, w, cells.iter().map(|&(r, c)| (r - r0 + 1, c - c0 + 1)));
    let mut outside = vec![false; h * w];
    let mut queue = VecDeque::from([0usize]);
    outside[0] = true;
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / w, i % w);
        let nbrs = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in nbrs {
            if nr < h && nc < w {
                let j = nr * w + nc;
                if !outside[j] && !local.get(nr, nc) {
                    outside[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    let holes = (0..h * w)
        .filter(|&i| !outside[i] && !local.get(i / w, i % w))
        .count();
    if holes == 0 {
        f64::INFINITY
    } else {
        cells.len() as f64 / holes as f64
    }
}

/// Keeps clusters with area at least `b_s` and completeness at least
/// `r_cp_t`.
pub fn filter_candidates(
    clusters: Vec<ShapeCluster>,
    cell_size: f64,
    params: &ShapeParams,
) -> Vec<ShapeCluster> {
    clusters
        .into_iter()
        .filter(|c| {
            let area = c.cells.len() as f64 * cell_size * cell_size;
            area >= params.b_s - 1e-12 && completeness_index(&c.cells) >= params.r_cp_t
        })
        .collect()
}

pub fn morph_open(mask: &BinaryMask, side: usize) -> BinaryMask {
    mask.erode(side).dilate(side)
}

/// Tight box over the cells' outer edges.
pub fn min_bbox(cells: &[CellIndex], cell_size: f64) -> Result<BBox> {
    if cells.is_empty() {
        return Err(Error::DegenerateGeometry(
            "bounding box of an empty cluster".into(),
        ));
    }
    let r0 = cells.iter().map(|c| c.0).min().unwrap();
    let c0 = cells.iter().map(|c| c.1).min().unwrap();
    let r1 = cells.iter().map(|c| c.0).max().unwrap();
    let c1 = cells.iter().map(|c| c.1).max().unwrap();
    Ok(BBox {
        u_min: c0 as f64 * cell_size,
        v_min: r0 as f64 * cell_size,
        width: (c1 - c0 + 1) as f64 * cell_size,
        height: (r1 - r0 + 1) as f64 * cell_size,
    })
}

/// Nearest-rank percentile of sorted data.
pub fn percentile_nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    let rank = ((pct / 100.0) * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Drops candidates whose width/height ratio lies outside the percentile
/// band, once there are at least `n_min` of them.
pub fn rectangularity_filter(
    candidates: Vec<OpeningCandidate>,
    params: &ShapeParams,
) -> Vec<OpeningCandidate> {
    if candidates.len() < params.n_min || candidates.is_empty() {
        return candidates;
    }
    let mut idx: Vec<f64> = candidates.iter().map(|c| c.rectangularity).collect();
    idx.sort_by(f64::total_cmp);
    let hi = percentile_nearest_rank(&idx, params.pe_up);
    let lo = percentile_nearest_rank(&idx, params.pe_lo);
    candidates
        .into_iter()
        .filter(|c| c.rectangularity <= hi && c.rectangularity >= lo)
        .collect()
}

/// Area and completeness filtering, opening of the surviving cells, boxes,
/// then rectangularity rejection.
pub fn extract_openings(
    facade: &str,
    rows: usize,
    cols: usize,
    cell_size: f64,
    clusters: Vec<ShapeCluster>,
    params: &ShapeParams,
) -> Result<Vec<OpeningCandidate>> {
    let kept = filter_candidates(clusters, cell_size, params);
    let mask = BinaryMask::from_cells(
        rows,
        cols,
        kept.iter().flat_map(|c| c.cells.iter().copied()),
    );
    let opened = morph_open(&mask, params.structuring_element);
    let mut out = Vec::new();
    for c in kept {
        let completeness = completeness_index(&c.cells);
        let cells: Vec<CellIndex> = c
            .cells
            .iter()
            .copied()
            .filter(|&(r, k)| opened.get(r, k))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let bbox = min_bbox(&cells, cell_size)?;
        out.push(OpeningCandidate {
            facade: facade.to_string(),
            kind: c.kind,
            area: cells.len() as f64 * cell_size * cell_size,
            rectangularity: bbox.width / bbox.height,
            cells,
            bbox,
            completeness,
            mean_posterior: c.mean_posterior,
        });
    }
    Ok(rectangularity_filter(out, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block(r0: usize, c0: usize, h: usize, w: usize) -> Vec<CellIndex> {
        (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| (r, c)))
            .collect()
    }

    fn cluster(cells: Vec<CellIndex>) -> ShapeCluster {
        ShapeCluster {
            cells,
            kind: OpeningKind::Window,
            mean_posterior: 0.8,
        }
    }

    #[test]
    fn completeness_examples() {
        assert_eq!(completeness_index(&block(0, 0, 10, 10)), f64::INFINITY);
        let hole = block(2, 2, 5, 5);
        let holed: Vec<_> = block(0, 0, 10, 10)
            .into_iter()
            .filter(|c| !hole.contains(c))
            .collect();
        assert_eq!(completeness_index(&holed), 3.0);
        let inner = block(1, 1, 8, 8);
        let ring: Vec<_> = block(0, 0, 10, 10)
            .into_iter()
            .filter(|c| !inner.contains(c))
            .collect();
        assert_eq!(completeness_index(&ring), 36.0 / 64.0);
    }

    #[test]
    fn area_filter() {
        let p = ShapeParams::default();
        let kept = filter_candidates(
            vec![cluster(block(0, 0, 15, 10)), cluster(block(20, 0, 4, 5))],
            0.1,
            &p,
        );
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].cells.len(), 150);
    }

    #[test]
    fn opening_examples() {
        let solid = BinaryMask::from_cells(9, 9, block(2, 2, 5, 5));
        assert_eq!(morph_open(&solid, 3), solid);
        let single = BinaryMask::from_cells(5, 5, [(2, 2)]);
        assert_eq!(morph_open(&single, 3).count(), 0);
        let mut cells = block(1, 1, 5, 5);
        cells.extend(block(1, 9, 5, 5));
        let blocks = BinaryMask::from_cells(7, 15, cells.clone());
        cells.extend([(3, 6), (3, 7), (3, 8)]);
        let bridged = BinaryMask::from_cells(7, 15, cells);
        assert_eq!(morph_open(&bridged, 3), blocks);
    }

    #[test]
    fn bbox_examples() {
        let cells: Vec<_> = (5..20).flat_map(|r| (3..13).map(move |c| (r, c))).collect();
        let b = min_bbox(&cells, 0.1).unwrap();
        assert!((b.width - 1.0).abs() < 1e-12 && (b.height - 1.5).abs() < 1e-12);
        assert!((b.u_min - 0.3).abs() < 1e-12 && (b.v_min - 0.5).abs() < 1e-12);
        let b = min_bbox(&[(4, 4)], 0.1).unwrap();
        assert!((b.width - 0.1).abs() < 1e-12 && (b.height - 0.1).abs() < 1e-12);
        let mut l = block(0, 0, 6, 2);
        l.extend(block(0, 2, 2, 4));
        let b = min_bbox(&l, 0.1).unwrap();
        assert!((b.width - 0.6).abs() < 1e-12 && (b.height - 0.6).abs() < 1e-12);
    }

    fn candidate(a: f64, b: f64) -> OpeningCandidate {
        OpeningCandidate {
            facade: "f".into(),
            kind: OpeningKind::Window,
            cells: vec![],
            bbox: BBox {
                u_min: 0.0,
                v_min: 0.0,
                width: a,
                height: b,
            },
            area: a * b,
            completeness: f64::INFINITY,
            rectangularity: a / b,
            mean_posterior: 0.8,
        }
    }

    #[test]
    fn rectangularity_examples() {
        let p = ShapeParams::default();
        assert_eq!(
            rectangularity_filter(vec![candidate(1.0, 1.5); 20], &p).len(),
            20
        );
        let mut c = vec![candidate(1.0, 1.5); 19];
        c.push(candidate(8.0, 1.0));
        let kept = rectangularity_filter(c, &p);
        assert_eq!(kept.len(), 19);
        assert!(kept.iter().all(|k| k.rectangularity < 1.0));
        assert_eq!(
            rectangularity_filter(vec![candidate(1.0, 1.5), candidate(8.0, 1.0)], &p).len(),
            2
        );
    }

    #[test]
    fn pipeline_on_one_window() {
        let out = extract_openings(
            "f",
            30,
            30,
            0.1,
            vec![cluster(block(5, 3, 15, 10))],
            &ShapeParams::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        let b = out[0].bbox;
        assert!((b.width - 1.0).abs() < 1e-12 && (b.height - 1.5).abs() < 1e-12);
    }

    #[test]
    fn iou_of_boxes() {
        let a = BBox {
            u_min: 0.0,
            v_min: 0.0,
            width: 1.0,
            height: 1.0,
        };
        let b = BBox {
            u_min: 0.5,
            v_min: 0.0,
            width: 1.0,
            height: 1.0,
        };
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
    }

    /// Hole count by brute force: background cells from which no 4-path of
    /// background reaches the raster border.
    fn holes_oracle(mask: &BinaryMask) -> usize {
        let mut reach = vec![false; mask.rows * mask.cols];
        let mut changed = true;
        for r in 0..mask.rows {
            for c in 0..mask.cols {
                if !mask.get(r, c) && (r == 0 || c == 0 || r + 1 == mask.rows || c + 1 == mask.cols)
                {
                    reach[r * mask.cols + c] = true;
                }
            }
        }
        while changed {
            changed = false;
            for r in 0..mask.rows {
                for c in 0..mask.cols {
                    let i = r * mask.cols + c;
                    if reach[i] || mask.get(r, c) {
                        continue;
                    }
                    let n = [
                        (r.wrapping_sub(1), c),
                        (r + 1, c),
                        (r, c.wrapping_sub(1)),
                        (r, c + 1),
                    ];
                    if n.iter()
                        .any(|&(a, b)| a < mask.rows && b < mask.cols && reach[a * mask.cols + b])
                    {
                        reach[i] = true;
                        changed = true;
                    }
                }
            }
        }
        (0..reach.len())
            .filter(|&i| !reach[i] && !mask.get(i / mask.cols, i % mask.cols))
            .count()
    }

    proptest! {
        #[test]
        fn opening_idempotent_and_shrinking(bits in prop::collection::vec(any::<bool>(), 144)) {
            let mut m = BinaryMask::new(12, 12);
            for (i, b) in bits.iter().enumerate() {
                m.set(i / 12, i % 12, *b);
            }
            let o = morph_open(&m, 3);
            prop_assert_eq!(morph_open(&o, 3), o.clone());
            prop_assert!(o.cells().all(|(r, c)| m.get(r, c)));
        }

        #[test]
        fn completeness_matches_oracle(bits in prop::collection::vec(any::<bool>(), 100)) {
            // Pad so the raster border is background, matching the local frame.
            let cells: Vec<CellIndex> = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| (i / 10 + 1, i % 10 + 1)).collect();
            prop_assume!(!cells.is_empty());
            let mask = BinaryMask::from_cells(12, 12, cells.iter().copied());
            let holes = holes_oracle(&mask);
            let r = completeness_index(&cells);
            if holes == 0 {
                prop_assert!(r.is_infinite());
            } else {
                prop_assert!((r - cells.len() as f64 / holes as f64).abs() < 1e-12);
            }
        }

        #[test]
        fn bbox_is_tight(cells in prop::collection::vec((0usize..30, 0usize..30), 1..40)) {
            let b = min_bbox(&cells, 0.1).unwrap();
            for &(r, c) in &cells {
                prop_assert!(b.contains(c as f64 * 0.1 + 0.05, r as f64 * 0.1 + 0.05));
            }
            let shrunk_w = BBox { width: b.width - 0.1, ..b };
            let shrunk_u = BBox { u_min: b.u_min + 0.1, width: b.width - 0.1, ..b };
            prop_assert!(cells.iter().any(|&(r, c)| !shrunk_w.contains(c as f64 * 0.1 + 0.05, r as f64 * 0.1 + 0.05)));
            prop_assert!(cells.iter().any(|&(r, c)| !shrunk_u.contains(c as f64 * 0.1 + 0.05, r as f64 * 0.1 + 0.05)));
        }
    }
}
