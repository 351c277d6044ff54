//! Connected polymers modulo translation, generated once each by Redelmeier's method:
//! the lexicographically smallest block sits at the origin.

use susyrg_core::Site;

/// 26 neighbor offsets.
pub fn neighbor_offsets() -> Vec<Site> {
    let mut out = Vec::with_capacity(26);
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if [x, y, z] != [0, 0, 0] {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

struct Grid {
    half: i64,
    width: i64,
    coords: Vec<Site>,
    neighbors: Vec<Vec<u16>>,
    allowed: Vec<bool>,
}

impl Grid {
    fn new(cap: usize) -> Self {
        let half = cap as i64;
        let width = 2 * half + 1;
        let n = (width * width * width) as usize;
        let mut coords = Vec::with_capacity(n);
        for x in -half..=half {
            for y in -half..=half {
                for z in -half..=half {
                    coords.push([x, y, z]);
                }
            }
        }
        let offsets = neighbor_offsets();
        let index = |c: Site| ((c[0] + half) * width + c[1] + half) * width + c[2] + half;
        let inside = |c: Site| c.iter().all(|v| v.abs() <= half);
        let neighbors = coords
            .iter()
            .map(|&c| {
                offsets
                    .iter()
                    .map(|o| [c[0] + o[0], c[1] + o[1], c[2] + o[2]])
                    .filter(|&d| inside(d))
                    .map(|d| index(d) as u16)
                    .collect()
            })
            .collect();
        let allowed = coords.iter().map(|&c| c > [0, 0, 0]).collect();
        Grid {
            half,
            width,
            coords,
            neighbors,
            allowed,
        }
    }

    fn origin(&self) -> u16 {
        (((self.half) * self.width + self.half) * self.width + self.half) as u16
    }
}

/// Calls `visit` on every connected polymer with 1..=cap blocks, each exactly once
/// up to translation.
pub fn for_each_polymer(cap: usize, mut visit: impl FnMut(&[Site])) {
    if cap == 0 {
        return;
    }
    let grid = Grid::new(cap);
    let mut seen = vec![false; grid.coords.len()];
    let origin = grid.origin();
    seen[origin as usize] = true;
    let mut cells = Vec::with_capacity(cap);
    let mut buffers: Vec<Vec<u16>> = vec![Vec::new(); cap + 1];
    buffers[0].push(origin);
    recurse(
        &grid,
        cap,
        0,
        &mut buffers,
        &mut seen,
        &mut cells,
        &mut visit,
    );
}

fn recurse(
    grid: &Grid,
    cap: usize,
    depth: usize,
    buffers: &mut Vec<Vec<u16>>,
    seen: &mut [bool],
    cells: &mut Vec<Site>,
    visit: &mut impl FnMut(&[Site]),
) {
    let mut untried = std::mem::take(&mut buffers[depth]);
    while let Some(c) = untried.pop() {
        cells.push(grid.coords[c as usize]);
        visit(cells);
        if cells.len() < cap {
            let mut next = std::mem::take(&mut buffers[depth + 1]);
            next.clear();
            next.extend_from_slice(&untried);
            let mark = next.len();
            for &n in &grid.neighbors[c as usize] {
                if grid.allowed[n as usize] && !seen[n as usize] {
                    seen[n as usize] = true;
                    next.push(n);
                }
            }
            let added: Vec<u16> = next[mark..].to_vec();
            buffers[depth + 1] = next;
            recurse(grid, cap, depth + 1, buffers, seen, cells, visit);
            for n in added {
                seen[n as usize] = false;
            }
        }
        cells.pop();
    }
    buffers[depth] = untried;
}

/// Number of polymers of each size 0..=cap modulo translation.
pub fn polymer_counts(cap: usize) -> Vec<u64> {
    let mut counts = vec![0u64; cap + 1];
    for_each_polymer(cap, |c| counts[c.len()] += 1);
    counts
}
