//! Cell shapes and their exact metrics, plus Monte Carlo cross-checks.
//!
//! Every shape is a regular polytope kept in a canonical pose: barycenter at
//! the origin, planar shapes in the z = 0 plane. Measures, inradii, and
//! circumradii are standard closed forms in the size parameter; the two
//! extremal distances (`diameter`, `adjacent_diameter`) are computed from the
//! vertex set, where the maximum of a convex body is always attained.
//!
//! Adjacency convention: the neighbor of a cell is its mirror image through
//! one face, so `adjacent_barycenter_distance == 2 * inradius` exactly.

use crate::point::Point;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Golden ratio, used by the dodecahedron and icosahedron vertex tables.
const PHI: f64 = 1.618033988749894848;

/// Field dimensionality. Planar shapes pair with `Two`, solids with `Three`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("shape size must be positive and finite, got {0}")]
    InvalidSize(f64),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("{given} samples is below the minimum of {minimum}")]
    TooFewSamples { given: u64, minimum: u64 },
    #[error("lens center distance {center_distance} outside [0, {}] for radius {radius}", 2.0 * radius)]
    LensDomain { center_distance: f64, radius: f64 },
    #[error("sphere chain needs at least one sphere")]
    EmptyChain,
}

/// The eight supported cell shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Square,
    EquilateralTriangle,
    RegularHexagon,
    Cube,
    RegularTetrahedron,
    RegularOctahedron,
    RegularDodecahedron,
    RegularIcosahedron,
}

pub const ALL_SHAPES: [ShapeKind; 8] = [
    ShapeKind::Square,
    ShapeKind::EquilateralTriangle,
    ShapeKind::RegularHexagon,
    ShapeKind::Cube,
    ShapeKind::RegularTetrahedron,
    ShapeKind::RegularOctahedron,
    ShapeKind::RegularDodecahedron,
    ShapeKind::RegularIcosahedron,
];

impl ShapeKind {
    pub fn dimension(self) -> Dimension {
        match self {
            ShapeKind::Square | ShapeKind::EquilateralTriangle | ShapeKind::RegularHexagon => {
                Dimension::Two
            }
            _ => Dimension::Three,
        }
    }

    /// Meaning of the size parameter for this kind.
    pub fn size_meaning(self) -> &'static str {
        match self {
            ShapeKind::Square => "side length",
            ShapeKind::EquilateralTriangle => "height",
            ShapeKind::RegularHexagon => "side length",
            _ => "edge length",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::EquilateralTriangle => "triangle",
            ShapeKind::RegularHexagon => "hexagon",
            ShapeKind::Cube => "cube",
            ShapeKind::RegularTetrahedron => "tetrahedron",
            ShapeKind::RegularOctahedron => "octahedron",
            ShapeKind::RegularDodecahedron => "dodecahedron",
            ShapeKind::RegularIcosahedron => "icosahedron",
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(ShapeKind::Square),
            "triangle" | "equilateral-triangle" => Ok(ShapeKind::EquilateralTriangle),
            "hexagon" | "regular-hexagon" => Ok(ShapeKind::RegularHexagon),
            "cube" => Ok(ShapeKind::Cube),
            "tetrahedron" | "tetra" => Ok(ShapeKind::RegularTetrahedron),
            "octahedron" | "octa" => Ok(ShapeKind::RegularOctahedron),
            "dodecahedron" | "dodeca" => Ok(ShapeKind::RegularDodecahedron),
            "icosahedron" | "icosa" => Ok(ShapeKind::RegularIcosahedron),
            other => Err(format!(
                "unknown shape '{other}' (expected square, triangle, hexagon, cube, \
                 tetrahedron, octahedron, dodecahedron, or icosahedron)"
            )),
        }
    }
}

/// A concrete cell: a shape kind plus its size parameter.
///
/// The size parameter is the side length for squares and hexagons, the height
/// for equilateral triangles, and the edge length for all solids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellShape {
    pub kind: ShapeKind,
    pub size: f64,
}

impl CellShape {
    pub fn new(kind: ShapeKind, size: f64) -> Result<Self, GeometryError> {
        if !(size > 0.0 && size.is_finite()) {
            return Err(GeometryError::InvalidSize(size));
        }
        Ok(CellShape { kind, size })
    }

    pub fn metrics(&self) -> ShapeMetrics {
        shape_metrics(self)
    }

    /// Vertices in canonical pose (barycenter at origin).
    pub fn vertices(&self) -> Vec<Point> {
        canonical_vertices(self.kind, self.size)
    }

    /// Whether `p` lies in the canonical-pose shape (boundary inclusive).
    pub fn contains(&self, p: Point) -> bool {
        if self.kind.dimension() == Dimension::Two && p.z != 0.0 {
            return false;
        }
        let inr = inradius(self.kind, self.size);
        face_normals(self.kind)
            .iter()
            .all(|n| p.dot(*n) <= inr + 1e-12 * self.size)
    }

    /// Axis-aligned bounding box of the canonical pose, as (low, high).
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in self.vertices() {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            lo.z = lo.z.min(v.z);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
            hi.z = hi.z.max(v.z);
        }
        if self.kind.dimension() == Dimension::Two {
            lo.z = 0.0;
            hi.z = 0.0;
        }
        (lo, hi)
    }

    /// The face plane used by the mirror-adjacency convention, as a unit
    /// outward normal; the plane sits at distance `inradius` from the origin.
    pub fn adjacency_normal(&self) -> Point {
        adjacency_normal(self.kind)
    }
}

/// Exact metrics of a cell shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMetrics {
    /// Area (2D) or volume (3D).
    pub measure: f64,
    pub inradius: f64,
    pub circumradius: f64,
    /// Largest distance between two points of the cell.
    pub diameter: f64,
    /// Distance between the barycenters of a cell and its face-mirror
    /// neighbor; equals `2 * inradius` by construction.
    pub adjacent_barycenter_distance: f64,
    /// Largest distance between a point of the cell and a point of its
    /// face-mirror neighbor.
    pub adjacent_diameter: f64,
}

/// Closed-form metrics for a shape. Exact to floating precision.
pub fn shape_metrics(shape: &CellShape) -> ShapeMetrics {
    let s = shape.size;
    let inr = inradius(shape.kind, s);
    let verts = canonical_vertices(shape.kind, s);
    let mirrored = mirrored_vertices(shape);
    ShapeMetrics {
        measure: measure(shape.kind, s),
        inradius: inr,
        circumradius: circumradius(shape.kind, s),
        diameter: max_pairwise(&verts, &verts),
        adjacent_barycenter_distance: 2.0 * inr,
        adjacent_diameter: max_pairwise(&verts, &mirrored),
    }
}

fn measure(kind: ShapeKind, s: f64) -> f64 {
    match kind {
        ShapeKind::Square => s * s,
        // Height h: side = 2h/sqrt(3), area = h^2 / sqrt(3).
        ShapeKind::EquilateralTriangle => s * s / 3f64.sqrt(),
        ShapeKind::RegularHexagon => 1.5 * 3f64.sqrt() * s * s,
        ShapeKind::Cube => s * s * s,
        ShapeKind::RegularTetrahedron => 2f64.sqrt() / 12.0 * s.powi(3),
        ShapeKind::RegularOctahedron => 2f64.sqrt() / 3.0 * s.powi(3),
        ShapeKind::RegularDodecahedron => (15.0 + 7.0 * 5f64.sqrt()) / 4.0 * s.powi(3),
        ShapeKind::RegularIcosahedron => 5.0 / 12.0 * (3.0 + 5f64.sqrt()) * s.powi(3),
    }
}

fn inradius(kind: ShapeKind, s: f64) -> f64 {
    match kind {
        ShapeKind::Square => s / 2.0,
        ShapeKind::EquilateralTriangle => s / 3.0,
        ShapeKind::RegularHexagon => 3f64.sqrt() / 2.0 * s,
        ShapeKind::Cube => s / 2.0,
        ShapeKind::RegularTetrahedron => s / (2.0 * 6f64.sqrt()),
        ShapeKind::RegularOctahedron => s / 6f64.sqrt(),
        ShapeKind::RegularDodecahedron => s / 2.0 * ((25.0 + 11.0 * 5f64.sqrt()) / 10.0).sqrt(),
        ShapeKind::RegularIcosahedron => 3f64.sqrt() / 12.0 * (3.0 + 5f64.sqrt()) * s,
    }
}

fn circumradius(kind: ShapeKind, s: f64) -> f64 {
    match kind {
        ShapeKind::Square => s / 2f64.sqrt(),
        ShapeKind::EquilateralTriangle => 2.0 * s / 3.0,
        ShapeKind::RegularHexagon => s,
        ShapeKind::Cube => 3f64.sqrt() / 2.0 * s,
        ShapeKind::RegularTetrahedron => 6f64.sqrt() / 4.0 * s,
        ShapeKind::RegularOctahedron => s / 2f64.sqrt(),
        ShapeKind::RegularDodecahedron => 3f64.sqrt() / 4.0 * (1.0 + 5f64.sqrt()) * s,
        ShapeKind::RegularIcosahedron => s / 4.0 * (10.0 + 2.0 * 5f64.sqrt()).sqrt(),
    }
}

fn max_pairwise(a: &[Point], b: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for p in a {
        for q in b {
            best = best.max(p.distance_sq(*q));
        }
    }
    best.sqrt()
}

fn canonical_vertices(kind: ShapeKind, s: f64) -> Vec<Point> {
    match kind {
        ShapeKind::Square => {
            let h = s / 2.0;
            vec![
                Point::xy(-h, -h),
                Point::xy(h, -h),
                Point::xy(h, h),
                Point::xy(-h, h),
            ]
        }
        ShapeKind::EquilateralTriangle => {
            // Height s, apex up, base tangent to the incircle at y = -s/3.
            let half_base = s / 3f64.sqrt();
            vec![
                Point::xy(-half_base, -s / 3.0),
                Point::xy(half_base, -s / 3.0),
                Point::xy(0.0, 2.0 * s / 3.0),
            ]
        }
        ShapeKind::RegularHexagon => (0..6)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_3 * k as f64;
                Point::xy(s * a.cos(), s * a.sin())
            })
            .collect(),
        ShapeKind::Cube => {
            let h = s / 2.0;
            let mut v = Vec::with_capacity(8);
            for &x in &[-h, h] {
                for &y in &[-h, h] {
                    for &z in &[-h, h] {
                        v.push(Point::new(x, y, z));
                    }
                }
            }
            v
        }
        ShapeKind::RegularTetrahedron => {
            let k = s / (2.0 * 2f64.sqrt());
            vec![
                Point::new(k, k, k),
                Point::new(k, -k, -k),
                Point::new(-k, k, -k),
                Point::new(-k, -k, k),
            ]
        }
        ShapeKind::RegularOctahedron => {
            let c = s / 2f64.sqrt();
            vec![
                Point::new(c, 0.0, 0.0),
                Point::new(-c, 0.0, 0.0),
                Point::new(0.0, c, 0.0),
                Point::new(0.0, -c, 0.0),
                Point::new(0.0, 0.0, c),
                Point::new(0.0, 0.0, -c),
            ]
        }
        ShapeKind::RegularDodecahedron => {
            // Canonical edge length 2/phi, so scale by s*phi/2.
            let k = s * PHI / 2.0;
            let inv = 1.0 / PHI;
            let mut v = Vec::with_capacity(20);
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        v.push(Point::new(k * x, k * y, k * z));
                    }
                }
            }
            for &(a, b) in &[(inv, PHI), (inv, -PHI), (-inv, PHI), (-inv, -PHI)] {
                v.push(Point::new(0.0, k * a, k * b));
                v.push(Point::new(k * a, k * b, 0.0));
                v.push(Point::new(k * b, 0.0, k * a));
            }
            v
        }
        ShapeKind::RegularIcosahedron => {
            // Canonical edge length 2, so scale by s/2.
            let k = s / 2.0;
            let mut v = Vec::with_capacity(12);
            for &(a, b) in &[(1.0, PHI), (1.0, -PHI), (-1.0, PHI), (-1.0, -PHI)] {
                v.push(Point::new(0.0, k * a, k * b));
                v.push(Point::new(k * a, k * b, 0.0));
                v.push(Point::new(k * b, 0.0, k * a));
            }
            v
        }
    }
}

/// Unit outward normals of all faces. Every face plane sits at distance
/// `inradius` from the barycenter, which makes the point-in-shape test a
/// uniform dot-product sweep.
fn face_normals(kind: ShapeKind) -> Vec<Point> {
    match kind {
        ShapeKind::Square => vec![
            Point::xy(1.0, 0.0),
            Point::xy(-1.0, 0.0),
            Point::xy(0.0, 1.0),
            Point::xy(0.0, -1.0),
        ],
        ShapeKind::EquilateralTriangle => {
            let c30 = 3f64.sqrt() / 2.0;
            vec![
                Point::xy(0.0, -1.0),
                Point::xy(-c30, 0.5),
                Point::xy(c30, 0.5),
            ]
        }
        ShapeKind::RegularHexagon => (0..6)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_6 + std::f64::consts::FRAC_PI_3 * k as f64;
                Point::xy(a.cos(), a.sin())
            })
            .collect(),
        ShapeKind::Cube => vec![
            Point::new(1.0, 0.0, 0.0),
            Point::new(-1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, -1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
            Point::new(0.0, 0.0, -1.0),
        ],
        ShapeKind::RegularTetrahedron => {
            // One face opposite each vertex; outward normal points away from it.
            canonical_vertices(kind, 1.0)
                .into_iter()
                .map(|v| (-v).normalized())
                .collect()
        }
        ShapeKind::RegularOctahedron => {
            let mut v = Vec::with_capacity(8);
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        v.push(Point::new(x, y, z).normalized());
                    }
                }
            }
            v
        }
        // Face normals of the two phi-based solids, in the handedness of the
        // vertex tables above: pentagons of the dodecahedron point along the
        // (1, 0, phi) cyclic family, icosahedron triangles along (1, 1, 1)
        // and the (1, 0, phi^2) cyclic family.
        ShapeKind::RegularDodecahedron => signed_cyclic_family(1.0, PHI),
        ShapeKind::RegularIcosahedron => {
            let mut v: Vec<Point> = Vec::with_capacity(20);
            for &x in &[-1.0, 1.0] {
                for &y in &[-1.0, 1.0] {
                    for &z in &[-1.0, 1.0] {
                        v.push(Point::new(x, y, z).normalized());
                    }
                }
            }
            v.extend(signed_cyclic_family(1.0, PHI * PHI));
            v
        }
    }
}

/// Unit vectors (a, 0, b) under cyclic coordinate shifts and sign flips of
/// the two nonzero entries: 12 directions.
fn signed_cyclic_family(a: f64, b: f64) -> Vec<Point> {
    let mut v = Vec::with_capacity(12);
    for &sa in &[-a, a] {
        for &sb in &[-b, b] {
            v.push(Point::new(sa, 0.0, sb).normalized());
            v.push(Point::new(sb, sa, 0.0).normalized());
            v.push(Point::new(0.0, sb, sa).normalized());
        }
    }
    v
}

/// Normal of the canonical face shared with the mirror neighbor.
fn adjacency_normal(kind: ShapeKind) -> Point {
    match kind {
        ShapeKind::Square | ShapeKind::Cube => Point::new(1.0, 0.0, 0.0),
        ShapeKind::EquilateralTriangle => Point::xy(0.0, -1.0),
        ShapeKind::RegularHexagon => Point::xy(0.0, 1.0),
        ShapeKind::RegularTetrahedron => Point::new(-1.0, -1.0, -1.0).normalized(),
        ShapeKind::RegularOctahedron | ShapeKind::RegularIcosahedron => {
            Point::new(1.0, 1.0, 1.0).normalized()
        }
        ShapeKind::RegularDodecahedron => Point::new(1.0, 0.0, PHI).normalized(),
    }
}

/// Reflect `p` through the canonical adjacency face plane of `shape`.
fn reflect_through_adjacency_face(shape: &CellShape, p: Point) -> Point {
    let n = adjacency_normal(shape.kind);
    let offset = inradius(shape.kind, shape.size);
    p - n.scale(2.0 * (p.dot(n) - offset))
}

fn mirrored_vertices(shape: &CellShape) -> Vec<Point> {
    shape
        .vertices()
        .into_iter()
        .map(|v| reflect_through_adjacency_face(shape, v))
        .collect()
}

/// A cell shape at a world position, optionally mirrored into the
/// face-adjacent pose.
#[derive(Debug, Clone, Copy)]
pub struct PlacedShape {
    shape: CellShape,
    anchor: Point,
    mirrored: bool,
}

impl PlacedShape {
    /// Place the canonical shape with its barycenter at `center`.
    pub fn at(shape: CellShape, center: Point) -> Self {
        PlacedShape { shape, anchor: center, mirrored: false }
    }

    /// The face-mirror neighbor of this placement.
    pub fn face_neighbor(&self) -> PlacedShape {
        PlacedShape { shape: self.shape, anchor: self.anchor, mirrored: !self.mirrored }
    }

    pub fn shape(&self) -> &CellShape {
        &self.shape
    }

    pub fn barycenter(&self) -> Point {
        self.to_world(Point::ZERO)
    }

    fn to_world(&self, canonical: Point) -> Point {
        let q = if self.mirrored {
            reflect_through_adjacency_face(&self.shape, canonical)
        } else {
            canonical
        };
        q + self.anchor
    }

    pub fn contains(&self, p: Point) -> bool {
        let local = p - self.anchor;
        let canonical = if self.mirrored {
            reflect_through_adjacency_face(&self.shape, local)
        } else {
            local
        };
        self.shape.contains(canonical)
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.shape.vertices().into_iter().map(|v| self.to_world(v)).collect()
    }

    /// One point uniform in the shape, by rejection from the bounding box.
    pub fn sample(&self, rng: &mut impl Rng) -> Point {
        let (lo, hi) = self.shape.bounding_box();
        let planar = self.shape.kind.dimension() == Dimension::Two;
        loop {
            let p = Point::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                if planar { 0.0 } else { rng.random_range(lo.z..=hi.z) },
            );
            if self.shape.contains(p) {
                return self.to_world(p);
            }
        }
    }
}

/// One side of a max-distance query: a region or a single point.
#[derive(Debug, Clone, Copy)]
pub enum OracleTarget {
    Shape(PlacedShape),
    Point(Point),
}

impl OracleTarget {
    fn anchors(&self) -> Vec<Point> {
        match self {
            OracleTarget::Shape(s) => s.vertices(),
            OracleTarget::Point(p) => vec![*p],
        }
    }
}

pub const ORACLE_MIN_SAMPLES: u64 = 10_000;

/// Sampled maximum distance between two targets.
///
/// Vertices of shape targets always enter the candidate set, so maxima that
/// are attained at vertices are found exactly; interior samples act as an
/// independent check and never bias the result upward. For fixed inputs and
/// seed the result is reproducible. Pure interior maxima are underestimated
/// by the sample spacing.
pub fn max_distance_oracle(
    a: &OracleTarget,
    b: &OracleTarget,
    samples: u64,
    seed: u64,
) -> Result<f64, GeometryError> {
    if samples < ORACLE_MIN_SAMPLES {
        return Err(GeometryError::TooFewSamples { given: samples, minimum: ORACLE_MIN_SAMPLES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors_a = a.anchors();
    let anchors_b = b.anchors();
    let mut best = 0.0f64;
    for p in &anchors_a {
        for q in &anchors_b {
            best = best.max(p.distance_sq(*q));
        }
    }
    for _ in 0..samples {
        let p = match a {
            OracleTarget::Shape(s) => s.sample(&mut rng),
            OracleTarget::Point(p) => *p,
        };
        let q = match b {
            OracleTarget::Shape(s) => s.sample(&mut rng),
            OracleTarget::Point(p) => *p,
        };
        best = best.max(p.distance_sq(q));
        for anchor in &anchors_b {
            best = best.max(p.distance_sq(*anchor));
        }
        for anchor in &anchors_a {
            best = best.max(q.distance_sq(*anchor));
        }
    }
    Ok(best.sqrt())
}

/// Spherical (or circular, in 2D) lens: the intersection of two balls of
/// equal radius whose centers sit `center_distance` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereLensSpec {
    pub radius: f64,
    pub center_distance: f64,
}

impl SphereLensSpec {
    pub fn new(radius: f64, center_distance: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        if !(0.0..=2.0 * radius).contains(&center_distance) {
            return Err(GeometryError::LensDomain { center_distance, radius });
        }
        Ok(SphereLensSpec { radius, center_distance })
    }
}

/// Exact lens measure: volume for `Dimension::Three`, area for `Two`.
///
/// At distance 0 the lens is the whole ball; at distance `2R` it vanishes;
/// in between it decreases strictly.
pub fn lens_measure(spec: &SphereLensSpec, dimension: Dimension) -> f64 {
    let r = spec.radius;
    let t = spec.center_distance;
    match dimension {
        Dimension::Three => std::f64::consts::PI / 12.0 * (4.0 * r + t) * (2.0 * r - t).powi(2),
        Dimension::Two => {
            2.0 * r * r * (t / (2.0 * r)).acos() - t / 2.0 * (4.0 * r * r - t * t).sqrt()
        }
    }
}

/// A Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

pub const CHAIN_MIN_SAMPLES: u64 = 1_000_000;

/// Volume of the union of `n` spheres of radius `r` whose centers sit on a
/// line at spacing `r`, estimated by hit-or-miss sampling over the bounding
/// box. Reproducible for fixed `(n, r, samples, seed)`.
pub fn sphere_chain_union_volume(
    n: usize,
    radius: f64,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, GeometryError> {
    if n == 0 {
        return Err(GeometryError::EmptyChain);
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeometryError::InvalidRadius(radius));
    }
    if samples < CHAIN_MIN_SAMPLES {
        return Err(GeometryError::TooFewSamples { given: samples, minimum: CHAIN_MIN_SAMPLES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Centers at x = 0, r, ..., (n-1) r; box pads one radius on every side.
    let x_lo = -radius;
    let x_hi = (n as f64) * radius;
    let box_volume = (x_hi - x_lo) * (2.0 * radius) * (2.0 * radius);
    let r_sq = radius * radius;
    let mut hits: u64 = 0;
    for _ in 0..samples {
        let x = rng.random_range(x_lo..=x_hi);
        let y = rng.random_range(-radius..=radius);
        let z = rng.random_range(-radius..=radius);
        let yz = y * y + z * z;
        // Only the nearest center (and its neighbor) can contain the point.
        let i = (x / radius).floor().clamp(0.0, (n - 1) as f64) as usize;
        let mut inside = false;
        for c in [i, (i + 1).min(n - 1)] {
            let dx = x - c as f64 * radius;
            if dx * dx + yz <= r_sq {
                inside = true;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        value: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn unit_square_metrics() {
        let m = CellShape::new(ShapeKind::Square, 1.0).unwrap().metrics();
        assert!(close(m.measure, 1.0, 1e-15));
        assert!(close(m.inradius, 0.5, 1e-15));
        assert!(close(m.circumradius, 2f64.sqrt() / 2.0, 1e-15));
        assert!(close(m.diameter, 2f64.sqrt(), 1e-12));
        assert!(close(m.adjacent_barycenter_distance, 1.0, 1e-15));
        assert!(close(m.adjacent_diameter, 5f64.sqrt(), 1e-12));
    }

    #[test]
    fn triangle_metrics_at_height_1_5() {
        let m = CellShape::new(ShapeKind::EquilateralTriangle, 1.5).unwrap().metrics();
        assert!(close(m.measure, 3.0 * 3f64.sqrt() / 4.0, 1e-12));
        assert!(close(m.inradius, 0.5, 1e-15));
        assert!(close(m.circumradius, 1.0, 1e-15));
        assert!(close(m.diameter, 3.0 / 3f64.sqrt(), 1e-12));
        assert!(close(m.adjacent_diameter, 3.0, 1e-12));
    }

    #[test]
    fn hexagon_adjacent_diameter_is_sqrt13() {
        let m = CellShape::new(ShapeKind::RegularHexagon, 1.0).unwrap().metrics();
        assert!(close(m.adjacent_diameter, 13f64.sqrt(), 1e-12));
        assert!(close(m.diameter, 2.0, 1e-12));
        assert!(close(m.measure, 1.5 * 3f64.sqrt(), 1e-12));
    }

    #[test]
    fn unit_cube_metrics() {
        let m = CellShape::new(ShapeKind::Cube, 1.0).unwrap().metrics();
        assert!(close(m.measure, 1.0, 1e-15));
        assert!(close(m.circumradius, 3f64.sqrt() / 2.0, 1e-12));
        assert!(close(m.diameter, 3f64.sqrt(), 1e-12));
        assert!(close(m.adjacent_barycenter_distance, 1.0, 1e-15));
        assert!(close(m.adjacent_diameter, 6f64.sqrt(), 1e-12));
    }

    #[test]
    fn tetrahedron_metrics() {
        let m = CellShape::new(ShapeKind::RegularTetrahedron, 1.0).unwrap().metrics();
        assert!(close(m.measure, 2f64.sqrt() / 12.0, 1e-12));
        assert!(close(m.circumradius, 6f64.sqrt() / 4.0, 1e-12));
        assert!(close(m.adjacent_barycenter_distance, 1.0 / 6f64.sqrt(), 1e-12));
        assert!(close(m.diameter, 1.0, 1e-12));
        // Two face-glued tetrahedra: apex-to-apex through the shared face.
        assert!(close(m.adjacent_diameter, (8f64 / 3.0).sqrt(), 1e-12));
    }

    #[test]
    fn vertex_tables_match_closed_forms() {
        for kind in ALL_SHAPES {
            let shape = CellShape::new(kind, 1.3).unwrap();
            let m = shape.metrics();
            let verts = shape.vertices();
            let max_norm = verts.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            assert!(close(max_norm, m.circumradius, 1e-9), "{kind:?} circumradius");
            let min_norm = verts.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            assert!(min_norm >= m.inradius - 1e-9, "{kind:?} vertices inside insphere");
            // Every vertex satisfies every face halfspace; every face plane is
            // touched by at least one vertex (regular polytopes are
            // vertex-transitive, faces tangent to the insphere).
            for n in face_normals(kind) {
                let max_dot = verts.iter().map(|v| v.dot(n)).fold(f64::NEG_INFINITY, f64::max);
                assert!(
                    (max_dot - m.inradius).abs() < 1e-9,
                    "{kind:?} face plane not supported by a vertex: {max_dot} vs {}",
                    m.inradius
                );
            }
            // Barycenter at the origin.
            let centroid = verts.iter().fold(Point::ZERO, |acc, v| acc + *v)
                .scale(1.0 / verts.len() as f64);
            assert!(centroid.norm() < 1e-9, "{kind:?} centroid drift {}", centroid.norm());
        }
    }

    #[test]
    fn metric_ordering_invariants() {
        for kind in ALL_SHAPES {
            let m = CellShape::new(kind, 2.7).unwrap().metrics();
            assert!(m.inradius > 0.0);
            assert!(m.inradius <= m.circumradius + 1e-12);
            assert!(m.circumradius <= m.diameter + 1e-12, "{kind:?}");
            assert!(m.diameter <= 2.0 * m.circumradius + 1e-12);
            assert!((m.adjacent_barycenter_distance - 2.0 * m.inradius).abs() < 1e-12);
            assert!(m.adjacent_diameter >= m.diameter - 1e-12, "{kind:?}");
            assert!(m.adjacent_diameter <= 2.0 * m.circumradius + 2.0 * m.inradius + 1e-12);
        }
    }

    #[test]
    fn monte_carlo_volume_confirms_measures() {
        // Hit-or-miss over the bounding box, independent of the sampling used
        // by PlacedShape. Catches wrong face normals or wrong volume formulas.
        for kind in ALL_SHAPES {
            let shape = CellShape::new(kind, 1.0).unwrap();
            let (lo, hi) = shape.bounding_box();
            let planar = kind.dimension() == Dimension::Two;
            let box_measure = if planar {
                (hi.x - lo.x) * (hi.y - lo.y)
            } else {
                (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let n = 200_000;
            let mut hits = 0u32;
            for _ in 0..n {
                let p = Point::new(
                    rng.random_range(lo.x..=hi.x),
                    rng.random_range(lo.y..=hi.y),
                    if planar { 0.0 } else { rng.random_range(lo.z..=hi.z) },
                );
                if shape.contains(p) {
                    hits += 1;
                }
            }
            let est = box_measure * hits as f64 / n as f64;
            let expected = shape.metrics().measure;
            assert!(
                close(est, expected, 0.01),
                "{kind:?}: MC measure {est} vs closed form {expected}"
            );
        }
    }

    #[test]
    fn mirror_neighbor_shares_face_plane() {
        for kind in ALL_SHAPES {
            let shape = CellShape::new(kind, 1.0).unwrap();
            let placed = PlacedShape::at(shape, Point::new(0.3, -0.2, 0.1 * 0.0));
            let neighbor = placed.face_neighbor();
            let m = shape.metrics();
            let d = placed.barycenter().distance(neighbor.barycenter());
            assert!(close(d, m.adjacent_barycenter_distance, 1e-12), "{kind:?}");
            // Mirror symmetry: reflecting twice is the identity.
            let back = neighbor.face_neighbor();
            assert!(back.barycenter().distance(placed.barycenter()) < 1e-12);
        }
    }

    #[test]
    fn oracle_rejects_too_few_samples() {
        let shape = CellShape::new(ShapeKind::Square, 1.0).unwrap();
        let a = OracleTarget::Shape(PlacedShape::at(shape, Point::ZERO));
        let err = max_distance_oracle(&a, &a, 10, 42).unwrap_err();
        assert!(matches!(err, GeometryError::TooFewSamples { .. }));
    }

    #[test]
    fn oracle_matches_adjacent_diameter_for_squares() {
        let shape = CellShape::new(ShapeKind::Square, 1.0).unwrap();
        let a = PlacedShape::at(shape, Point::ZERO);
        let b = a.face_neighbor();
        let d = max_distance_oracle(
            &OracleTarget::Shape(a),
            &OracleTarget::Shape(b),
            10_000,
            42,
        )
        .unwrap();
        assert!(close(d, 5f64.sqrt(), 0.01));
    }

    #[test]
    fn oracle_is_deterministic_per_seed() {
        let shape = CellShape::new(ShapeKind::RegularHexagon, 1.0).unwrap();
        let a = OracleTarget::Shape(PlacedShape::at(shape, Point::ZERO));
        let b = OracleTarget::Point(Point::xy(3.0, 1.0));
        let d1 = max_distance_oracle(&a, &b, 20_000, 9).unwrap();
        let d2 = max_distance_oracle(&a, &b, 20_000, 9).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn lens_measure_closed_forms() {
        let r = 1.0;
        let spec = |t| SphereLensSpec::new(r, t).unwrap();
        assert!(close(lens_measure(&spec(1.0), Dimension::Three), 5.0 * PI / 12.0, 1e-12));
        assert!(close(lens_measure(&spec(0.0), Dimension::Three), 4.0 * PI / 3.0, 1e-12));
        assert!(lens_measure(&spec(2.0), Dimension::Three).abs() < 1e-12);
        assert!(close(
            lens_measure(&spec(1.0), Dimension::Two),
            (4.0 * PI - 3.0 * 3f64.sqrt()) / 6.0,
            1e-12
        ));
        assert!(close(lens_measure(&spec(0.0), Dimension::Two), PI, 1e-12));
        assert!(lens_measure(&spec(2.0), Dimension::Two).abs() < 1e-12);
    }

    #[test]
    fn lens_measure_decreases_in_center_distance() {
        for dim in [Dimension::Two, Dimension::Three] {
            let mut prev = f64::INFINITY;
            for k in 0..=40 {
                let t = 2.0 * k as f64 / 40.0;
                let v = lens_measure(&SphereLensSpec::new(1.0, t).unwrap(), dim);
                assert!(v < prev + 1e-12, "not monotone at t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn lens_rejects_out_of_range_distance() {
        assert!(SphereLensSpec::new(1.0, 2.5).is_err());
        assert!(SphereLensSpec::new(1.0, -0.1).is_err());
        assert!(SphereLensSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn sphere_chain_matches_closed_form_within_three_sigma() {
        // Union of n spheres at spacing r: n*(4/3)pi r^3 minus (n-1) lenses at
        // distance r. Spheres two apart just touch, so no triple corrections.
        let r = 1.0;
        let lens = lens_measure(&SphereLensSpec::new(r, r).unwrap(), Dimension::Three);
        for n in 1..=3usize {
            let exact = n as f64 * 4.0 * PI / 3.0 * r.powi(3) - (n as f64 - 1.0) * lens;
            let est = sphere_chain_union_volume(n, r, 1_000_000, 11).unwrap();
            assert!(
                (est.value - exact).abs() <= 3.0 * est.std_error,
                "n={n}: {} vs {exact} (se {})",
                est.value,
                est.std_error
            );
        }
    }

    #[test]
    fn sphere_chain_validates_inputs() {
        assert!(matches!(
            sphere_chain_union_volume(0, 1.0, 2_000_000, 1),
            Err(GeometryError::EmptyChain)
        ));
        assert!(matches!(
            sphere_chain_union_volume(2, 1.0, 10, 1),
            Err(GeometryError::TooFewSamples { .. })
        ));
    }

    proptest! {
        #[test]
        fn metrics_scale_homogeneously(
            kind_idx in 0usize..8,
            size in 0.05f64..50.0,
            lambda in 0.1f64..10.0,
        ) {
            let kind = ALL_SHAPES[kind_idx];
            let base = CellShape::new(kind, size).unwrap().metrics();
            let scaled = CellShape::new(kind, size * lambda).unwrap().metrics();
            let dim_pow = match kind.dimension() { Dimension::Two => 2, Dimension::Three => 3 };
            prop_assert!(close(scaled.measure, base.measure * lambda.powi(dim_pow), 1e-9));
            for (a, b) in [
                (scaled.inradius, base.inradius),
                (scaled.circumradius, base.circumradius),
                (scaled.diameter, base.diameter),
                (scaled.adjacent_barycenter_distance, base.adjacent_barycenter_distance),
                (scaled.adjacent_diameter, base.adjacent_diameter),
            ] {
                prop_assert!(close(a, b * lambda, 1e-9));
            }
        }

        #[test]
        fn sampled_points_lie_inside(kind_idx in 0usize..8, seed in 0u64..1000) {
            let kind = ALL_SHAPES[kind_idx];
            let shape = CellShape::new(kind, 1.0).unwrap();
            let placed = PlacedShape::at(shape, Point::new(1.0, -2.0, 0.0));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..50 {
                let p = placed.sample(&mut rng);
                prop_assert!(placed.contains(p));
            }
        }
    }
}
