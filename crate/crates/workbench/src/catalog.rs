//! Named desk-scale building constructions: a rank-one panel, the flag
//! buildings of the projective planes over the two- and three-element
//! fields, the flag building of three-dimensional projective space over
//! the two-element field, and direct products. Incidence is enumerated
//! from explicit subspaces, so every object is reproducible bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use twinbuildings::building::{validate_building, BuildingSpace, Chamber};
use twinbuildings::coxeter::{build_group, CoxeterGroup, CoxeterMatrix, Gen};

/// Failures of catalog-id parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogError {
    /// The text does not name a catalog object.
    UnknownId { text: String },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::UnknownId { text } => {
                write!(f, "unknown catalog id: {text}")
            }
        }
    }
}

impl std::error::Error for CatalogError {}

/// A named catalog object. `rank1(n)` needs `n >= 3` so panels are thick;
/// `prod` needs at least two factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogId {
    Rank1(u32),
    Fano,
    Pg23,
    Pg32,
    Prod(Vec<CatalogId>),
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogId::Rank1(n) => write!(f, "rank1({n})"),
            CatalogId::Fano => write!(f, "fano"),
            CatalogId::Pg23 => write!(f, "pg23"),
            CatalogId::Pg32 => write!(f, "pg32"),
            CatalogId::Prod(fs) => {
                write!(f, "prod(")?;
                for (i, factor) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{factor}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for CatalogId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, CatalogError> {
        parse_id(s.trim()).ok_or_else(|| CatalogError::UnknownId {
            text: s.to_string(),
        })
    }
}

fn parse_id(s: &str) -> Option<CatalogId> {
    match s {
        "fano" => return Some(CatalogId::Fano),
        "pg23" => return Some(CatalogId::Pg23),
        "pg32" => return Some(CatalogId::Pg32),
        _ => {}
    }
    let inner = |prefix: &str| -> Option<&str> {
        s.strip_prefix(prefix)?
            .strip_prefix('(')
            .and_then(|rest| rest.strip_suffix(')'))
    };
    if let Some(arg) = inner("rank1") {
        let n: u32 = arg.trim().parse().ok()?;
        // Panels must be thick.
        return (n >= 3).then_some(CatalogId::Rank1(n));
    }
    if let Some(args) = inner("prod") {
        let factors = split_top_level(args)?
            .into_iter()
            .map(|part| parse_id(part.trim()))
            .collect::<Option<Vec<_>>>()?;
        return (factors.len() >= 2).then_some(CatalogId::Prod(factors));
    }
    None
}

/// Splits on commas not nested inside parentheses.
fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&s[start..]);
    Some(parts)
}

fn group_of(matrix: Vec<Vec<u32>>, cap: usize) -> Arc<CoxeterGroup> {
    let m = CoxeterMatrix::new(matrix).expect("catalog type matrices are well formed");
    Arc::new(build_group(m, cap).expect("catalog groups are finite and small"))
}

/// Builds the named object; every output passes full building validation.
pub fn generate_building(id: &CatalogId) -> BuildingSpace {
    match id {
        CatalogId::Rank1(n) => rank1_building(*n),
        CatalogId::Fano => pg2_building(&pg2_geometry(2)),
        CatalogId::Pg23 => pg2_building(&pg2_geometry(3)),
        CatalogId::Pg32 => pg32_building(&pg32_geometry()),
        CatalogId::Prod(fs) => {
            let mut it = fs.iter().map(generate_building);
            let first = it.next().expect("prod has at least two factors");
            it.fold(first, |acc, b| product_building(&acc, &b))
        }
    }
}

/// Single panel of `n` chambers over the rank-one group.
fn rank1_building(n: u32) -> BuildingSpace {
    let group = group_of(vec![vec![1]], 4);
    let panels = vec![vec![(0..n).map(Chamber).collect::<Vec<_>>()]];
    validate_building(group, n as usize, &panels).expect("a single panel is a building")
}

/// Point-line flag geometry of the projective plane over the field with
/// `q` elements: points and lines are the normalized one-dimensional
/// subspaces of the three-dimensional space and its dual, incidence is a
/// zero dot product.
pub struct PlaneGeometry {
    pub q: u32,
    /// Normalized point vectors, ascending.
    pub points: Vec<[u32; 3]>,
    /// Normalized line normal vectors, ascending.
    pub lines: Vec<[u32; 3]>,
    /// Incident (point index, line index) pairs, ascending; flag index is
    /// the chamber id.
    pub flags: Vec<(usize, usize)>,
}

impl PlaneGeometry {
    pub fn flag_id(&self, point: usize, line: usize) -> Option<usize> {
        self.flags.binary_search(&(point, line)).ok()
    }
}

/// Normalized representatives of one-dimensional subspaces of F_q^3: the
/// first nonzero coordinate is one; enumerated ascending.
fn normalized_triples(q: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let v = [a, b, c];
                let first = v.iter().find(|&&x| x != 0);
                if first == Some(&1) {
                    out.push(v);
                }
            }
        }
    }
    out
}

pub fn pg2_geometry(q: u32) -> PlaneGeometry {
    assert!(q == 2 || q == 3, "plane geometries are built over F2 and F3");
    let points = normalized_triples(q);
    let lines = normalized_triples(q);
    let dot = |u: &[u32; 3], v: &[u32; 3]| -> u32 {
        (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) % q
    };
    let mut flags = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for (j, l) in lines.iter().enumerate() {
            if dot(p, l) == 0 {
                flags.push((i, j));
            }
        }
    }
    flags.sort_unstable();
    PlaneGeometry {
        q,
        points,
        lines,
        flags,
    }
}

/// Chambers are flags; generator 0 moves the point along its line and
/// generator 1 moves the line around its point.
fn pg2_building(geo: &PlaneGeometry) -> BuildingSpace {
    let group = group_of(vec![vec![1, 3], vec![3, 1]], 16);
    let mut by_line: BTreeMap<usize, Vec<Chamber>> = BTreeMap::new();
    let mut by_point: BTreeMap<usize, Vec<Chamber>> = BTreeMap::new();
    for (id, &(p, l)) in geo.flags.iter().enumerate() {
        by_line.entry(l).or_default().push(Chamber(id as u32));
        by_point.entry(p).or_default().push(Chamber(id as u32));
    }
    let panels = vec![
        by_line.into_values().collect::<Vec<_>>(),
        by_point.into_values().collect::<Vec<_>>(),
    ];
    validate_building(group, geo.flags.len(), &panels)
        .expect("plane flag geometry satisfies the building axioms")
}

/// Point-line-plane flag geometry of three-dimensional projective space
/// over the two-element field. Points are the nonzero vectors of F_2^4
/// encoded as bit masks 1..=15; a plane is the kernel of the linear form
/// `v -> parity(v & normal)`.
pub struct SpaceGeometry {
    /// Point values (bit masks), ascending; point index = value - 1.
    pub points: Vec<u8>,
    /// Lines as ascending triples of point values, ascending.
    pub lines: Vec<[u8; 3]>,
    /// Plane normals (bit masks), ascending; the plane is the set of
    /// nonzero v with even parity of v & normal.
    pub planes: Vec<u8>,
    /// Incident (point index, line index, plane index) triples, ascending;
    /// flag index is the chamber id.
    pub flags: Vec<(usize, usize, usize)>,
}

fn parity(x: u8) -> u8 {
    (x.count_ones() % 2) as u8
}

impl SpaceGeometry {
    pub fn flag_id(&self, point: usize, line: usize, plane: usize) -> Option<usize> {
        self.flags.binary_search(&(point, line, plane)).ok()
    }

    pub fn line_index(&self, mut triple: [u8; 3]) -> Option<usize> {
        triple.sort_unstable();
        self.lines.binary_search(&triple).ok()
    }

    /// The flag permutation induced by an invertible linear map, given as
    /// four basis-image masks (row i is the image of basis vector i).
    /// Returns the image chamber of each chamber id.
    pub fn collineation(&self, rows: [u8; 4]) -> Vec<Chamber> {
        let apply = |v: u8| -> u8 {
            (0..4)
                .filter(|&i| v & (1 << i) != 0)
                .fold(0u8, |acc, i| acc ^ rows[i])
        };
        for v in 1..=15u8 {
            assert_ne!(apply(v), 0, "collineation rows must be invertible");
        }
        // A plane's image: the set of images of its points determines the
        // image normal.
        let plane_points = |normal: u8| -> Vec<u8> {
            (1..=15u8).filter(|&v| parity(v & normal) == 0).collect()
        };
        let plane_image = |plane: usize| -> usize {
            let mut image: Vec<u8> = plane_points(self.planes[plane])
                .into_iter()
                .map(apply)
                .collect();
            image.sort_unstable();
            self.planes
                .iter()
                .position(|&n| plane_points(n) == image)
                .expect("the image of a plane is a plane")
        };
        let plane_map: Vec<usize> = (0..self.planes.len()).map(plane_image).collect();
        self.flags
            .iter()
            .map(|&(p, l, h)| {
                let pv = apply(self.points[p]);
                let [a, b, c] = self.lines[l];
                let li = self
                    .line_index([apply(a), apply(b), apply(c)])
                    .expect("the image of a line is a line");
                let id = self
                    .flag_id((pv - 1) as usize, li, plane_map[h])
                    .expect("collineations preserve incidence");
                Chamber(id as u32)
            })
            .collect()
    }

    /// The flag permutation induced by the standard duality: a point maps
    /// to the plane with the same mask, a plane to the point with its
    /// normal's mask, a line to the set of masks orthogonal to all of its
    /// points. Incidence reverses, so the flag components swap roles.
    pub fn duality(&self) -> Vec<Chamber> {
        let line_dual = |l: usize| -> usize {
            let [a, b, _] = self.lines[l];
            let mut triple: Vec<u8> = (1..=15u8)
                .filter(|&w| parity(w & a) == 0 && parity(w & b) == 0)
                .collect();
            triple.sort_unstable();
            self.line_index([triple[0], triple[1], triple[2]])
                .expect("the dual of a line is a line")
        };
        self.flags
            .iter()
            .map(|&(p, l, h)| {
                let new_point = (self.planes[h] - 1) as usize;
                let new_plane = self
                    .planes
                    .iter()
                    .position(|&n| n == self.points[p])
                    .expect("plane normals cover all masks");
                let id = self
                    .flag_id(new_point, line_dual(l), new_plane)
                    .expect("duality preserves flags");
                Chamber(id as u32)
            })
            .collect()
    }
}

pub fn pg32_geometry() -> SpaceGeometry {
    let points: Vec<u8> = (1..=15).collect();
    let mut line_set: std::collections::BTreeSet<[u8; 3]> = std::collections::BTreeSet::new();
    for a in 1..=15u8 {
        for b in (a + 1)..=15 {
            let mut triple = [a, b, a ^ b];
            triple.sort_unstable();
            line_set.insert(triple);
        }
    }
    let lines: Vec<[u8; 3]> = line_set.into_iter().collect();
    let planes: Vec<u8> = (1..=15).collect();
    let mut flags = Vec::new();
    for (li, &[a, b, c]) in lines.iter().enumerate() {
        for (hi, &n) in planes.iter().enumerate() {
            if parity(a & n) == 0 && parity(b & n) == 0 && parity(c & n) == 0 {
                for v in [a, b, c] {
                    flags.push(((v - 1) as usize, li, hi));
                }
            }
        }
    }
    flags.sort_unstable();
    SpaceGeometry {
        points,
        lines,
        planes,
        flags,
    }
}

/// Chambers are point-line-plane flags; generator i moves component i of
/// the flag while fixing the other two.
fn pg32_building(geo: &SpaceGeometry) -> BuildingSpace {
    let group = group_of(
        vec![vec![1, 3, 2], vec![3, 1, 3], vec![2, 3, 1]],
        64,
    );
    let mut by_line_plane: BTreeMap<(usize, usize), Vec<Chamber>> = BTreeMap::new();
    let mut by_point_plane: BTreeMap<(usize, usize), Vec<Chamber>> = BTreeMap::new();
    let mut by_point_line: BTreeMap<(usize, usize), Vec<Chamber>> = BTreeMap::new();
    for (id, &(p, l, h)) in geo.flags.iter().enumerate() {
        by_line_plane.entry((l, h)).or_default().push(Chamber(id as u32));
        by_point_plane.entry((p, h)).or_default().push(Chamber(id as u32));
        by_point_line.entry((p, l)).or_default().push(Chamber(id as u32));
    }
    let panels = vec![
        by_line_plane.into_values().collect::<Vec<_>>(),
        by_point_plane.into_values().collect::<Vec<_>>(),
        by_point_line.into_values().collect::<Vec<_>>(),
    ];
    validate_building(group, geo.flags.len(), &panels)
        .expect("space flag geometry satisfies the building axioms")
}

/// Direct product: chambers are pairs (row-major ids), the type matrix is
/// block diagonal with commuting cross entries, and each generator acts in
/// one coordinate.
pub fn product_building(a: &BuildingSpace, b: &BuildingSpace) -> BuildingSpace {
    let ra = a.group().rank();
    let rb = b.group().rank();
    let rows_a = a.group().matrix().rows();
    let rows_b = b.group().matrix().rows();
    let mut rows = Vec::with_capacity(ra + rb);
    for row_a in rows_a {
        let mut row = row_a.clone();
        row.extend(std::iter::repeat_n(2, rb));
        rows.push(row);
    }
    for row_b in rows_b {
        let mut row = vec![2; ra];
        row.extend(row_b.iter().copied());
        rows.push(row);
    }
    let cap = a.group().order() * b.group().order() + 1;
    let group = group_of(rows, cap);
    let na = a.n_chambers() as u32;
    let nb = b.n_chambers() as u32;
    let id = |x: Chamber, y: Chamber| Chamber(x.0 * nb + y.0);
    let mut panels: Vec<Vec<Vec<Chamber>>> = Vec::with_capacity(ra + rb);
    for s in 0..ra {
        let mut classes = Vec::new();
        for class in a.panels(Gen(s as u16)) {
            for y in 0..nb {
                classes.push(class.iter().map(|&x| id(x, Chamber(y))).collect());
            }
        }
        panels.push(classes);
    }
    for t in 0..rb {
        let mut classes = Vec::new();
        for x in 0..na {
            for class in b.panels(Gen(t as u16)) {
                classes.push(class.iter().map(|&y| id(Chamber(x), y)).collect());
            }
        }
        panels.push(classes);
    }
    validate_building(group, (na * nb) as usize, &panels)
        .expect("a product of buildings is a building")
}
