//! Detection-to-track assignment.
//!
//! Costs are Euclidean distances between predicted track centres and
//! detection centres. [`assign`] solves the rectangular linear assignment
//! problem with the Hungarian method (shortest augmenting paths with dual
//! potentials, `O(n^2 m)`), after masking pairs beyond the gate.

/// Dense row-major cost matrix, rows are tracks and columns detections.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self::new(self.cols, self.rows, data)
    }
}

/// Pairwise Euclidean distances, `predictions x detections`.
pub fn cost_matrix(predictions: &[[f64; 2]], detections: &[[f64; 2]]) -> CostMatrix {
    let mut data = Vec::with_capacity(predictions.len() * detections.len());
    for p in predictions {
        for d in detections {
            data.push((p[0] - d[0]).hypot(p[1] - d[1]));
        }
    }
    CostMatrix::new(predictions.len(), detections.len(), data)
}

/// Minimum-cost assignment covering `min(rows, cols)` pairs.
///
/// Returns, for every row, the column it is assigned to. Deterministic:
/// columns are scanned in ascending order and only strictly better paths
/// replace earlier ones.
pub fn solve(costs: &CostMatrix) -> Vec<Option<usize>> {
    if costs.is_empty() {
        return vec![None; costs.rows()];
    }
    if costs.rows() > costs.cols() {
        let by_col = solve_wide(&costs.transposed());
        let mut by_row = vec![None; costs.rows()];
        for (col, row) in by_col.into_iter().enumerate() {
            if let Some(row) = row {
                by_row[row] = Some(col);
            }
        }
        return by_row;
    }
    solve_wide(costs)
}

/// Hungarian method for `rows <= cols`; every row gets a column.
fn solve_wide(costs: &CostMatrix) -> Vec<Option<usize>> {
    let n = costs.rows();
    let m = costs.cols();
    // 1-based with a virtual column 0, as in the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_slack = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        min_slack.iter_mut().for_each(|s| *s = f64::INFINITY);
        used.iter_mut().for_each(|u| *u = false);
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=m {
                if used[col] {
                    continue;
                }
                let reduced = costs.get(r0 - 1, col - 1) - u[r0] - v[col];
                if reduced < min_slack[col] {
                    min_slack[col] = reduced;
                    way[col] = col0;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    col1 = col;
                }
            }
            for col in 0..=m {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut by_row = vec![None; n];
    for col in 1..=m {
        if owner[col] != 0 {
            by_row[owner[col] - 1] = Some(col - 1);
        }
    }
    by_row
}

/// Outcome of a gated assignment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    /// `(track index, detection index)`, sorted by track index.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl Assignment {
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.matches.iter().map(|&(r, c)| costs.get(r, c)).sum()
    }
}

/// Optimal one-to-one assignment with gating.
///
/// Pairs costing more than `gate_distance` are replaced by a sentinel larger
/// than any feasible total, solved, and then dropped from the result. The
/// sentinel makes the solver prefer the largest number of gated pairs and,
/// among those, the cheapest.
pub fn assign(costs: &CostMatrix, gate_distance: f64) -> Assignment {
    let rows = costs.rows();
    let cols = costs.cols();
    if costs.is_empty() {
        return Assignment {
            matches: Vec::new(),
            unmatched_tracks: (0..rows).collect(),
            unmatched_detections: (0..cols).collect(),
        };
    }

    let allowed = |c: f64| c <= gate_distance;
    let max_allowed = costs
        .data
        .iter()
        .copied()
        .filter(|c| allowed(*c))
        .fold(0.0f64, f64::max);
    let needs_mask = costs.data.iter().any(|c| !allowed(*c));
    let solved = if needs_mask {
        let sentinel = (max_allowed + 1.0) * (rows.min(cols) as f64 + 1.0);
        let masked = CostMatrix::new(
            rows,
            cols,
            costs
                .data
                .iter()
                .map(|&c| if allowed(c) { c } else { sentinel })
                .collect(),
        );
        solve(&masked)
    } else {
        solve(costs)
    };

    let mut out = Assignment::default();
    let mut detection_taken = vec![false; cols];
    for (row, col) in solved.into_iter().enumerate() {
        match col {
            Some(col) if allowed(costs.get(row, col)) => {
                out.matches.push((row, col));
                detection_taken[col] = true;
            }
            _ => out.unmatched_tracks.push(row),
        }
    }
    out.unmatched_detections = (0..cols).filter(|c| !detection_taken[*c]).collect();
    out
}
