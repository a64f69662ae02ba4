use super::{RunLog, StepRecord};

/// Width of the step buckets used for continuing-task curves.
pub const BUCKET: usize = 100;
/// Trailing window of the smoothed episodic curve.
pub const SMOOTHING: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateCurve {
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First `x` whose mean reaches `level`.
    pub fn first_reaching(&self, level: f64) -> Option<usize> {
        self.points.iter().find(|p| p.mean >= level).map(|p| p.x)
    }

    /// Builds a curve from per-run series, truncated to the shortest series.
    pub fn from_series(series: &[Vec<f64>], x_of: impl Fn(usize) -> usize) -> Self {
        let len = series.iter().map(Vec::len).min().unwrap_or(0);
        let points = (0..len)
            .map(|i| {
                let column: Vec<f64> = series.iter().map(|s| s[i]).collect();
                let (mean, stderr) = mean_stderr(&column);
                CurvePoint { x: x_of(i), mean, stderr, n: column.len() }
            })
            .collect();
        Self { points }
    }
}

/// Sample mean and standard error (`n - 1` denominator; `0` for one value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Trailing moving average; early entries average what is available.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

fn bucket_means(steps: &[StepRecord], bucket: usize, f: impl Fn(&StepRecord) -> f64) -> Vec<f64> {
    steps.chunks(bucket).map(|c| c.iter().map(&f).sum::<f64>() / c.len() as f64).collect()
}

/// All curves derived from a set of successful runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curves {
    /// Steps per episode against episode index.
    pub episodes: AggregateCurve,
    pub episodes_smoothed: AggregateCurve,
    /// Mean reward per step in each bucket, keyed by the bucket's first step.
    pub reward_rate: AggregateCurve,
    /// Cumulative reward after each bucket, keyed by steps taken.
    pub cumulative: AggregateCurve,
    /// Fraction of optimal actions per bucket, where the environment knows.
    pub optimal: Option<AggregateCurve>,
}

impl Curves {
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a RunLog>) -> Self {
        let runs: Vec<&RunLog> = runs.into_iter().filter(|r| !r.failed()).collect();
        let lengths: Vec<Vec<f64>> =
            runs.iter().map(|r| r.episodes().iter().map(|e| e.length as f64).collect()).collect();
        let smoothed: Vec<Vec<f64>> = lengths.iter().map(|l| moving_average(l, SMOOTHING)).collect();
        let rates: Vec<Vec<f64>> = runs.iter().map(|r| bucket_means(&r.steps, BUCKET, |s| s.reward)).collect();
        let cumulative: Vec<Vec<f64>> = runs
            .iter()
            .map(|r| {
                let mut total = 0.0;
                r.steps
                    .chunks(BUCKET)
                    .map(|c| {
                        c.iter().for_each(|s| total += s.reward);
                        total
                    })
                    .collect()
            })
            .collect();
        let labelled = !runs.is_empty() && runs.iter().all(|r| r.steps.iter().all(|s| s.optimal.is_some()));
        let optimal = labelled.then(|| {
            let per_run: Vec<Vec<f64>> = runs
                .iter()
                .map(|r| bucket_means(&r.steps, BUCKET, |s| f64::from(u8::from(s.optimal == Some(true)))))
                .collect();
            AggregateCurve::from_series(&per_run, |i| i * BUCKET)
        });
        let ends = |i: usize| ((i + 1) * BUCKET).min(runs.iter().map(|r| r.steps.len()).min().unwrap_or(0));
        Self {
            episodes: AggregateCurve::from_series(&lengths, |i| i),
            episodes_smoothed: AggregateCurve::from_series(&smoothed, |i| i),
            reward_rate: AggregateCurve::from_series(&rates, |i| i * BUCKET),
            cumulative: AggregateCurve::from_series(&cumulative, ends),
            optimal,
        }
    }
}
