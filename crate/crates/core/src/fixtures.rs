//! Hand-rolled desk-scale fixtures shared by the unit tests. Each one is
//! built directly from its combinatorial description so the validated
//! structures have an independent origin.

#![allow(dead_code)]

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::building::{validate_building, BuildingSpace, Chamber};
use crate::coxeter::{build_group, CoxeterGroup, CoxeterMatrix, Gen, DEFAULT_GROUP_CAP};

pub fn group(rows: Vec<Vec<u32>>) -> Arc<CoxeterGroup> {
    let m = CoxeterMatrix::new(rows).unwrap();
    Arc::new(build_group(m, DEFAULT_GROUP_CAP).unwrap())
}

/// Free rank-1 system: W = {1, s}.
pub fn rank1_group() -> Arc<CoxeterGroup> {
    group(vec![vec![1]])
}

pub fn dihedral_group(m: u32) -> Arc<CoxeterGroup> {
    group(vec![vec![1, m], vec![m, 1]])
}

/// A2: both bonds 3.
pub fn a2_group() -> Arc<CoxeterGroup> {
    dihedral_group(3)
}

/// A1 x A1 x A1: all bonds 2 (order 8).
pub fn cube_group() -> Arc<CoxeterGroup> {
    group(vec![vec![1, 2, 2], vec![2, 1, 2], vec![2, 2, 1]])
}

/// A3: bonds 3, 2, 3 (order 24).
pub fn a3_group() -> Arc<CoxeterGroup> {
    group(vec![vec![1, 3, 2], vec![3, 1, 3], vec![2, 3, 1]])
}

/// Rank-1 building on n chambers: one panel holding everything.
pub fn rank1_building(n: u32) -> BuildingSpace {
    let panels = vec![vec![(0..n).map(Chamber).collect::<Vec<_>>()]];
    validate_building(rank1_group(), n as usize, &panels).unwrap()
}

/// Thin 2m-gon: the single apartment of the dihedral system I2(m).
/// Chambers sit in a cycle with edge types alternating s0, s1.
pub fn polygon_building(m: u32) -> BuildingSpace {
    let n = 2 * m;
    let mut s_classes = Vec::new();
    let mut t_classes = Vec::new();
    for i in (0..n).step_by(2) {
        s_classes.push(vec![Chamber(i), Chamber(i + 1)]);
        t_classes.push(vec![Chamber((i + 1) % n), Chamber((i + 2) % n)]);
    }
    validate_building(dihedral_group(m), n as usize, &[s_classes, t_classes]).unwrap()
}

/// Lines of the seven-point projective plane via the difference set {0, 1, 3}.
pub fn fano_lines() -> [[u32; 3]; 7] {
    let mut lines = [[0u32; 3]; 7];
    for (i, line) in lines.iter_mut().enumerate() {
        let i = i as u32;
        *line = [i, (i + 1) % 7, (i + 3) % 7];
        line.sort_unstable();
    }
    lines
}

/// Incident (point, line-index) flags sorted by (point, line).
pub fn fano_flags() -> Vec<(u32, u32)> {
    let lines = fano_lines();
    let mut flags = Vec::new();
    for p in 0..7 {
        for (li, line) in lines.iter().enumerate() {
            if line.contains(&p) {
                flags.push((p, li as u32));
            }
        }
    }
    flags.sort_unstable();
    flags
}

/// Panel partitions of the Fano flag complex: generator 0 varies the point
/// along a line, generator 1 varies the line through a point.
pub fn fano_panels() -> Vec<Vec<Vec<Chamber>>> {
    let flags = fano_flags();
    let mut by_line: Vec<Vec<Chamber>> = vec![Vec::new(); 7];
    let mut by_point: Vec<Vec<Chamber>> = vec![Vec::new(); 7];
    for (ci, &(p, li)) in flags.iter().enumerate() {
        by_line[li as usize].push(Chamber(ci as u32));
        by_point[p as usize].push(Chamber(ci as u32));
    }
    vec![by_line, by_point]
}

/// Flag building of the Fano plane: 21 chambers of type A2, thick.
pub fn fano_building() -> BuildingSpace {
    validate_building(a2_group(), 21, &fano_panels()).unwrap()
}

/// Product of three rank-1 buildings on 3 chambers each: 27 chambers,
/// generator i moves coordinate i of the digit triple (most significant
/// first).
pub fn cube_building() -> BuildingSpace {
    let mut panels = Vec::new();
    for stride in [9u32, 3, 1] {
        let mut classes = Vec::new();
        for base in 0..27u32 {
            // Enumerate each class once, from its member with digit 0.
            if (base / stride).is_multiple_of(3) {
                classes.push((0..3).map(|d| Chamber(base + d * stride)).collect());
            }
        }
        panels.push(classes);
    }
    validate_building(cube_group(), 27, &panels).unwrap()
}

/// Expected distance word between two Fano flags, classified by incidence.
pub fn fano_expected_word(
    lines: &[[u32; 3]; 7],
    a: (u32, u32),
    b: (u32, u32),
) -> Vec<Gen> {
    let (p, l) = a;
    let (q, m) = b;
    let on = |pt: u32, li: u32| lines[li as usize].contains(&pt);
    if a == b {
        vec![]
    } else if l == m {
        vec![Gen(0)]
    } else if p == q {
        vec![Gen(1)]
    } else if on(q, l) {
        // One step along l to the target point, then swing the line.
        vec![Gen(0), Gen(1)]
    } else if on(p, m) {
        vec![Gen(1), Gen(0)]
    } else {
        vec![Gen(0), Gen(1), Gen(0)]
    }
}

use crate::twin::{spherical_double, TwinSpace};

pub fn rank1_double(n: u32) -> TwinSpace {
    spherical_double(Arc::new(rank1_building(n))).unwrap()
}

pub fn polygon_double(m: u32) -> TwinSpace {
    spherical_double(Arc::new(polygon_building(m))).unwrap()
}

pub fn fano_double() -> TwinSpace {
    spherical_double(Arc::new(fano_building())).unwrap()
}

pub fn cube_double() -> TwinSpace {
    spherical_double(Arc::new(cube_building())).unwrap()
}
