use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_plane_self_map, degree_trace, DynamicsError};
use crate::converge::engine::{dist, members, Member, Reference};
use crate::converge::{w_converge, ConvergeError, ConvergeOptions};
use crate::graphgeom::{sample_sources, splitmix64, CompactRegion, SampleOptions};
use crate::meromap::{CompiledMap, MapFamily, RationalMap, DEFAULT_BIT_BUDGET};

type C64 = Complex<f64>;

/// Shortest admissible iterate schedule.
pub const MIN_SCHEDULE: usize = 8;

/// A square grid of cell centers on the real slice of one affine chart.
/// Column `i` varies the first chart coordinate, row `j` the second.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub chart: usize,
    pub resolution: usize,
    /// Lower-left corner of the window.
    pub lower: [f64; 2],
    /// Cell side length.
    pub cell: f64,
}

impl GridSpec {
    /// 64 x 64 cells of side 1/32 covering `[-65/64, 63/64]^2` in chart 0;
    /// cell (32, 32) is centered at the origin.
    pub fn standard() -> Self {
        Self { chart: 0, resolution: 64, lower: [-65.0 / 64.0; 2], cell: 1.0 / 32.0 }
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    /// Center of cell `index = row * resolution + col`.
    pub fn center(&self, index: usize) -> Vec<C64> {
        let (row, col) = (index / self.resolution, index % self.resolution);
        let at = |k: usize, lo: f64| lo + (k as f64 + 0.5) * self.cell;
        vec![C64::new(at(col, self.lower[0]), 0.0), C64::new(at(row, self.lower[1]), 0.0)]
    }

    /// The cell containing `x`, if its real parts fall in the window and its
    /// imaginary parts are within half a cell of the real slice.
    pub fn cell_of(&self, x: &[C64]) -> Option<usize> {
        if x.len() != 2 || x.iter().any(|z| z.im.abs() > 0.5 * self.cell) {
            return None;
        }
        let idx = |v: f64, lo: f64| {
            let k = ((v - lo) / self.cell).floor();
            (k >= 0.0 && k < self.resolution as f64).then_some(k as usize)
        };
        Some(idx(x[1].re, self.lower[1])? * self.resolution + idx(x[0].re, self.lower[0])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellVerdict {
    Undecided,
    InPhiWOnly,
    InPhiS,
}

impl CellVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CellVerdict::InPhiS => "in_phi_s",
            CellVerdict::InPhiWOnly => "in_phi_w_only",
            CellVerdict::Undecided => "undecided",
        }
    }

    pub fn in_weak(self) -> bool {
        self != CellVerdict::Undecided
    }

    fn gray(self) -> u8 {
        match self {
            CellVerdict::InPhiS => 255,
            CellVerdict::InPhiWOnly => 128,
            CellVerdict::Undecided => 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CellEvidence {
    /// `pointwise`, `graph` or `excluded`.
    pub method: &'static str,
    /// Pointwise sup distances, or the strong graph trace.
    pub trace: Vec<(usize, f64)>,
    /// Graph trace after excision, when the weak test ran.
    pub weak_trace: Vec<(usize, f64)>,
    #[serde(serialize_with = "crate::serial::cvecs")]
    pub exceptional_points: Vec<Vec<C64>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FatouCell {
    pub index: usize,
    #[serde(serialize_with = "crate::serial::cvec")]
    pub center: Vec<C64>,
    pub verdict: CellVerdict,
    pub ball_radius: f64,
    pub evidence: CellEvidence,
}

#[derive(Clone, Debug, Serialize)]
pub struct FatouGrid {
    pub schema: u32,
    pub grid: GridSpec,
    pub schedule: Vec<usize>,
    pub exclude_indeterminacy: bool,
    /// `deg(f^j)` up to the last schedule entry, or as far as the exact
    /// iterates fit the coefficient budget.
    pub degree_trace: Vec<u32>,
    /// Some schedule entries were evaluated as float orbits.
    pub orbit_fallback: bool,
    pub cells: Vec<FatouCell>,
}

impl FatouGrid {
    pub fn count(&self, v: CellVerdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == v).count()
    }

    pub fn weak_fraction(&self) -> f64 {
        self.cells.iter().filter(|c| c.verdict.in_weak()).count() as f64 / self.cells.len().max(1) as f64
    }

    pub fn strong_fraction(&self) -> f64 {
        self.count(CellVerdict::InPhiS) as f64 / self.cells.len().max(1) as f64
    }

    pub fn verdict_at(&self, x: &[C64]) -> Option<CellVerdict> {
        self.grid.cell_of(x).map(|i| self.cells[i].verdict)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell,row,col,x1,x2,verdict,method,last_distance,exceptional_points\n");
        for c in &self.cells {
            let last = c.evidence.weak_trace.last().or(c.evidence.trace.last()).map_or(f64::NAN, |t| t.1);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                c.index,
                c.index / self.grid.resolution,
                c.index % self.grid.resolution,
                c.center[0].re,
                c.center[1].re,
                c.verdict.as_str(),
                c.evidence.method,
                last,
                c.evidence.exceptional_points.len()
            );
        }
        s
    }

    /// Plain (P2) graymap, one pixel per cell, row 0 first.
    pub fn to_pgm(&self) -> String {
        let r = self.grid.resolution;
        let mut s = format!("P2\n{r} {r}\n255\n");
        for row in self.cells.chunks(r) {
            let line: Vec<String> = row.iter().map(|c| c.verdict.gray().to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct FatouOptions {
    /// Radius of the ball tested around each cell center; `None` means three
    /// quarters of the cell side.
    pub ball_radius: Option<f64>,
    pub tol: f64,
    pub tail: usize,
    /// Quasi-random points per ball for the pointwise test.
    pub cell_samples: usize,
    /// Cloud size for the graph test.
    pub graph_samples: usize,
    pub seed: u64,
    /// Treat cells meeting the critical curves of `f` as excluded, the
    /// equicontinuity convention, instead of testing graph convergence there.
    pub exclude_indeterminacy: bool,
    pub max_points: usize,
    pub budget: u64,
}

impl Default for FatouOptions {
    fn default() -> Self {
        Self {
            ball_radius: None,
            tol: 2e-2,
            tail: 5,
            cell_samples: 48,
            graph_samples: 1500,
            seed: 0,
            exclude_indeterminacy: false,
            max_points: 4,
            budget: DEFAULT_BIT_BUDGET,
        }
    }
}

/// Everything a cell test needs, built once per scan.
pub(crate) struct Scan<'a> {
    fam: MapFamily,
    members: Vec<Member>,
    reference: Reference,
    schedule: &'a [usize],
    opts: &'a FatouOptions,
    chart: usize,
    radius: f64,
    base: CompiledMap<f64>,
    /// Indeterminacy points of members and limits in the chart.
    special: Vec<Vec<C64>>,
}

impl<'a> Scan<'a> {
    pub(crate) fn new(
        f: &RationalMap,
        chart: usize,
        radius: f64,
        schedule: &'a [usize],
        opts: &'a FatouOptions,
    ) -> Result<Self, DynamicsError> {
        check_plane_self_map(f)?;
        if schedule.len() < MIN_SCHEDULE {
            return Err(DynamicsError::ScheduleTooShort(schedule.len()));
        }
        let fam = MapFamily::iterates_of(f.clone())?.with_budget(opts.budget);
        let members = members(&fam, schedule, chart)?;
        let reference = Reference::build(&fam, None, chart)?;
        let mut special = reference.indet();
        for m in &members {
            special.extend(m.target.indet.iter().cloned());
        }
        Ok(Self { fam, members, reference, schedule, opts, chart, radius, base: CompiledMap::from_map(f, chart), special })
    }

    pub(crate) fn orbit_fallback(&self) -> bool {
        self.members.iter().any(|m| m.target.exact.is_none())
    }

    /// `det[F, dF/dx1, dF/dx2]` of the base map, whose zero set is the
    /// critical curve in the chart.
    fn critical(&self, x: &[C64]) -> C64 {
        let jet = self.base.jet(x);
        let (v, d) = &jet[0];
        let col = |r: usize| [v[r], d[r][0], d[r][1]];
        let (a, b, c) = (col(0), col(1), col(2));
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
    }

    /// Whether the critical curve meets the closed ball `B(center, r)`:
    /// Newton projections onto the curve started from `starts` must land in
    /// the ball.
    fn meets_critical(&self, center: &[C64], starts: &[Vec<C64>]) -> bool {
        let h = 1e-7;
        starts.iter().any(|x0| {
            let mut x = x0.clone();
            for _ in 0..40 {
                let e = self.critical(&x);
                let grad: Vec<C64> = (0..2)
                    .map(|a| {
                        let mut y = x.clone();
                        y[a] += h;
                        (self.critical(&y) - e) / h
                    })
                    .collect();
                let g2: f64 = grad.iter().map(|g| g.norm_sqr()).sum();
                if e.norm() == 0.0 {
                    break;
                }
                if g2 == 0.0 {
                    return false;
                }
                // minimal-norm step solving grad . dx = -e
                let mut step = 0.0;
                for (xi, g) in x.iter_mut().zip(&grad) {
                    let d = -e * g.conj() / g2;
                    step += d.norm_sqr();
                    *xi += d;
                }
                if step.sqrt() < 1e-13 {
                    break;
                }
            }
            let e = self.critical(&x);
            e.norm() < 1e-9 && dist(&x, center) <= self.radius
        })
    }

    fn pointwise(&self, pts: &[Vec<C64>]) -> Option<Vec<(usize, f64)>> {
        let mut trace = Vec::new();
        for (k, m) in self.members.iter().enumerate() {
            let other = match &self.reference {
                Reference::Classes(_) => self.reference.class(m.n).expect("classes"),
                Reference::Cauchy(p) => match self.members[..k].iter().rev().find(|q| (m.n - q.n) % p == 0) {
                    Some(q) => &q.target,
                    None => continue,
                },
            };
            let mut worst = 0.0f64;
            for x in pts {
                let a = m.target.map.eval(x)?;
                let b = other.map.eval(x)?;
                worst = worst.max(a.distance(&b));
            }
            trace.push((m.n, worst));
        }
        Some(trace)
    }

    pub(crate) fn test(&self, center: &[C64], seed: u64) -> Result<(CellVerdict, CellEvidence), DynamicsError> {
        let r = self.radius;
        let mut ev = CellEvidence::default();
        let ball = CompactRegion::ball(center.to_vec(), r).with_chart(self.chart);
        let mut pts = vec![center.to_vec()];
        pts.extend(sample_sources(&ball, self.opts.cell_samples, seed, &SampleOptions::default())?);
        if self.opts.exclude_indeterminacy && self.meets_critical(center, &pts) {
            ev.method = "excluded";
            ev.note = Some("ball meets a critical curve".into());
            return Ok((CellVerdict::Undecided, ev));
        }
        let near_special = self.special.iter().any(|p| dist(p, center) <= r);
        if !near_special {
            if let Some(trace) = self.pointwise(&pts) {
                let v: Vec<f64> = trace.iter().map(|t| t.1).collect();
                ev.trace = trace;
                if crate::converge::judge(&v, self.opts.tol, self.opts.tail) == crate::converge::Verdict::Converges {
                    ev.method = "pointwise";
                    return Ok((CellVerdict::InPhiS, ev));
                }
            }
        }
        ev.method = "graph";
        let copts = ConvergeOptions {
            tol: self.opts.tol,
            tail: self.opts.tail,
            samples: self.opts.graph_samples,
            seed,
            max_points: self.opts.max_points,
            ..ConvergeOptions::default()
        };
        let report = match w_converge(&self.fam, &ball, self.schedule, &copts) {
            Ok(r) => r,
            Err(ConvergeError::ExceptionalSetNotFinite { found, .. }) => {
                ev.note = Some(format!("{found} failing clusters"));
                return Ok((CellVerdict::Undecided, ev));
            }
            Err(e) => return Err(e.into()),
        };
        let strong = report.diagnostics.get("strong_exit_code").copied() == Some(0.0);
        let weak = report.verdict == crate::converge::Verdict::Converges;
        if strong {
            ev.trace = report.distance_trace;
        } else {
            ev.weak_trace = report.distance_trace;
        }
        ev.exceptional_points = report.exceptional_points.into_iter().map(|p| p.point).collect();
        let verdict = match (strong, weak) {
            (true, _) => CellVerdict::InPhiS,
            (false, true) => CellVerdict::InPhiWOnly,
            _ => CellVerdict::Undecided,
        };
        Ok((verdict, ev))
    }
}

/// Strong and weak Fatou sets of `f` on `grid`.
///
/// Each cell's ball is first tested pointwise: the iterates are compared
/// with the lift limit of their residue class (or with the previous member
/// of the class when no limit is known) at the center and quasi-random
/// points. A cell passing that test, with no indeterminacy point of any
/// member or limit inside the ball, is strongly Fatou. The remaining cells
/// get the graph tests, which decide strong and weak membership.
pub fn fatou_scan(f: &RationalMap, grid: &GridSpec, schedule: &[usize], opts: &FatouOptions) -> Result<FatouGrid, DynamicsError> {
    let radius = opts.ball_radius.unwrap_or(0.75 * grid.cell);
    let scan = Scan::new(f, grid.chart, radius, schedule, opts)?;
    let cells = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let center = grid.center(index);
            let seed = splitmix64(opts.seed ^ splitmix64(index as u64));
            let (verdict, evidence) = scan.test(&center, seed)?;
            Ok(FatouCell { index, center, verdict, ball_radius: radius, evidence })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let last = schedule.last().copied().unwrap_or(0);
    Ok(FatouGrid {
        schema: 1,
        grid: grid.clone(),
        schedule: schedule.to_vec(),
        exclude_indeterminacy: opts.exclude_indeterminacy,
        degree_trace: degree_trace(f, last, opts.budget)?,
        orbit_fallback: scan.orbit_fallback(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_centers_the_origin() {
        let g = GridSpec::standard();
        let i = 32 * 64 + 32;
        assert_eq!(g.center(i), vec![C64::new(0.0, 0.0); 2]);
        assert_eq!(g.cell_of(&g.center(i)), Some(i));
        assert_eq!(g.cell_of(&[C64::new(0.3, 0.0), C64::new(-0.7, 0.001)]), Some(10 * 64 + 42));
        assert_eq!(g.cell_of(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]), None);
    }

    #[test]
    fn short_schedules_are_rejected() {
        let f = RationalMap::cremona();
        let r = fatou_scan(&f, &GridSpec::standard(), &[1, 2, 3], &FatouOptions::default());
        assert_eq!(r.unwrap_err(), DynamicsError::ScheduleTooShort(3));
    }
}
