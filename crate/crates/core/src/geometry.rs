//! Germ-grain blockage: line segments with Poisson midpoints and uniform
//! orientations. A link is LOS iff no segment touches it.

// Shadowed by the inherent methods whenever std is linked.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Axis-aligned rectangle, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Rect { min, max }
    }

    /// Square of side `side` centred at the origin.
    pub fn centered_square(side: f64) -> Self {
        let h = side / 2.0;
        Rect::new(Point::new(-h, -h), Point::new(h, h))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)
    }

    pub fn expanded(&self, margin: f64) -> Rect {
        Rect::new(self.min.translate(-margin, -margin), self.max.translate(margin, margin))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn is_valid(&self) -> bool {
        [self.min.x, self.min.y, self.max.x, self.max.y].iter().all(|v| v.is_finite())
            && self.width() > 0.0
            && self.height() > 0.0
    }

    /// Uniform point inside the rectangle.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(self.min.x + self.width() * rng.random::<f64>(), self.min.y + self.height() * rng.random::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub midpoint: Point,
    pub length: f64,
    /// Radians in (0, 2π].
    pub orientation: f64,
}

impl Segment {
    pub fn endpoints(&self) -> (Point, Point) {
        let (s, c) = self.orientation.sin_cos();
        let h = self.length / 2.0;
        (self.midpoint.translate(-h * c, -h * s), self.midpoint.translate(h * c, h * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkState {
    Los,
    Nlos,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `c` is collinear with `a`–`b`; is it inside their bounding box?
fn within_box(a: Point, b: Point, c: Point) -> bool {
    c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
}

/// Closed-segment intersection. Touching endpoints and collinear overlap
/// count as intersecting.
pub fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = sign(orient(b0, b1, a0));
    let d2 = sign(orient(b0, b1, a1));
    let d3 = sign(orient(a0, a1, b0));
    let d4 = sign(orient(a0, a1, b1));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(b0, b1, a0))
        || (d2 == 0 && within_box(b0, b1, a1))
        || (d3 == 0 && within_box(a0, a1, b0))
        || (d4 == 0 && within_box(a0, a1, b1))
}

/// `‖x − y‖^α` with the exponent picked by the link state.
pub fn pathloss(x: Point, y: Point, state: LinkState, alpha_los: f64, alpha_nlos: f64) -> f64 {
    let alpha = match state {
        LinkState::Los => alpha_los,
        LinkState::Nlos => alpha_nlos,
    };
    x.distance(y).powf(alpha)
}

/// Immutable blockage field with a uniform-grid index over segment
/// bounding boxes.
#[derive(Debug, Clone)]
pub struct BlockageField {
    segments: Vec<Segment>,
    ends: Vec<(Point, Point)>,
    window: Rect,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    /// CSR layout: segment ids of cell `k` are `ids[start[k]..start[k + 1]]`.
    start: Vec<u32>,
    ids: Vec<u32>,
}

impl BlockageField {
    pub fn new(window: Rect, segments: Vec<Segment>) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::Argument("blockage window must be finite and non-degenerate"));
        }
        let max_len = segments.iter().map(|s| s.length).fold(0.0, f64::max);
        let cell = max_len.max(25.0);
        let bounds = window.expanded(max_len / 2.0 + 1e-9);
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        let ends: Vec<_> = segments.iter().map(Segment::endpoints).collect();

        let mut field = BlockageField {
            segments,
            ends,
            window,
            origin: bounds.min,
            cell,
            nx,
            ny,
            start: Vec::new(),
            ids: Vec::new(),
        };
        let mut counts = vec![0u32; nx * ny + 1];
        field.for_each_cell_of_segments(|k, _| counts[k + 1] += 1);
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut cursor = counts.clone();
        let mut ids = vec![0u32; counts[nx * ny] as usize];
        field.for_each_cell_of_segments(|k, id| {
            ids[cursor[k] as usize] = id;
            cursor[k] += 1;
        });
        field.start = counts;
        field.ids = ids;
        Ok(field)
    }

    fn for_each_cell_of_segments(&self, mut visit: impl FnMut(usize, u32)) {
        for (id, (a, b)) in self.ends.iter().enumerate() {
            let (i0, j0) = self.cell_of(a.x.min(b.x), a.y.min(b.y));
            let (i1, j1) = self.cell_of(a.x.max(b.x), a.y.max(b.y));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    visit(j * self.nx + i, id as u32);
                }
            }
        }
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        (self.col(x), self.row(y))
    }

    fn col(&self, x: f64) -> usize {
        let i = ((x - self.origin.x) / self.cell).floor();
        (i.max(0.0) as usize).min(self.nx - 1)
    }

    fn row(&self, y: f64) -> usize {
        let j = ((y - self.origin.y) / self.cell).floor();
        (j.max(0.0) as usize).min(self.ny - 1)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Number of segments crossing the closed link `x`–`y`.
    pub fn count_blockages(&self, x: Point, y: Point) -> usize {
        let mut hits = Vec::new();
        self.visit_candidates(x, y, |id| {
            let (a, b) = self.ends[id];
            if segments_intersect(x, y, a, b) {
                hits.push(id);
            }
            false
        });
        hits.sort_unstable();
        hits.dedup();
        hits.len()
    }

    pub fn link_state(&self, x: Point, y: Point) -> LinkState {
        let blocked = self.visit_candidates(x, y, |id| {
            let (a, b) = self.ends[id];
            segments_intersect(x, y, a, b)
        });
        if blocked {
            LinkState::Nlos
        } else {
            LinkState::Los
        }
    }

    /// Calls `hit` on every segment indexed in a cell the link passes
    /// through, stopping early when it returns true. A segment may be
    /// visited more than once.
    fn visit_candidates(&self, x: Point, y: Point, mut hit: impl FnMut(usize) -> bool) -> bool {
        if self.segments.is_empty() {
            return false;
        }
        let (p, q) = if x.x <= y.x { (x, y) } else { (y, x) };
        let i0 = self.col(p.x);
        let i1 = self.col(q.x);
        let dx = q.x - p.x;
        let slope = if dx > 0.0 { (q.y - p.y) / dx } else { 0.0 };
        // Pad by a hair so rounding at cell borders never drops a cell.
        let pad = 1e-9 * self.cell;
        for i in i0..=i1 {
            // Portion of the link inside column i.
            let (ya, yb) = if i0 == i1 {
                (p.y, q.y)
            } else {
                let left = self.origin.x + i as f64 * self.cell;
                let xa = if i == i0 { p.x } else { (left - pad).max(p.x) };
                let xb = if i == i1 { q.x } else { (left + self.cell + pad).min(q.x) };
                (p.y + slope * (xa - p.x), p.y + slope * (xb - p.x))
            };
            let j0 = self.row(ya.min(yb) - pad);
            let j1 = self.row(ya.max(yb) + pad);
            for j in j0..=j1 {
                let k = j * self.nx + i;
                let ids = &self.ids[self.start[k] as usize..self.start[k + 1] as usize];
                for &id in ids {
                    if hit(id as usize) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Poisson germ-grain field: `density` midpoints per km² uniform in
/// `window`, every segment `length` m long with uniform orientation.
pub fn sample_blockage_field(density: f64, length: f64, window: Rect, seed: u64) -> Result<BlockageField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_blockage_field_with(density, length, window, &mut rng)
}

pub fn sample_blockage_field_with<R: Rng + ?Sized>(
    density: f64,
    length: f64,
    window: Rect,
    rng: &mut R,
) -> Result<BlockageField> {
    if !(density.is_finite() && density >= 0.0 && length.is_finite() && length > 0.0) {
        return Err(Error::Argument("blockage density and length must be finite, length positive"));
    }
    if !window.is_valid() {
        return Err(Error::Argument("blockage window must be finite and non-degenerate"));
    }
    let n = poisson_count(density * 1e-6 * window.area(), rng);
    let segments = (0..n)
        .map(|_| Segment { midpoint: window.sample(rng), length, orientation: 2.0 * PI * (1.0 - rng.random::<f64>()) })
        .collect();
    BlockageField::new(window, segments)
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}
