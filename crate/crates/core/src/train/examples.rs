use rand::seq::SliceRandom;
use rand::Rng;

/// One match-mismatch example inside a trial, by sample offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExamplePair {
    pub trial: usize,
    pub matched_onset: usize,
    pub mismatched_onset: usize,
    pub len: usize,
}

/// Segment geometry in samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentPlan {
    pub len: usize,
    pub stride: usize,
    pub gap: usize,
}

impl SegmentPlan {
    pub fn from_seconds(segment: f64, stride: f64, gap: f64, rate: f64) -> Self {
        let s = |x: f64| (x * rate).round() as usize;
        Self {
            len: s(segment),
            stride: s(stride).max(1),
            gap: s(gap),
        }
    }

    /// Samples covered by one example (matched, gap, mismatched).
    pub fn span(&self) -> usize {
        2 * self.len + self.gap
    }
}

/// Matched onsets at `0, stride, 2·stride, …`; the mismatched segment
/// starts `gap` samples after the matched one ends. Onsets whose example
/// would run past the trial are not emitted.
pub fn enumerate_examples(trial: usize, samples: usize, plan: SegmentPlan) -> Vec<ExamplePair> {
    if samples < plan.span() || plan.len == 0 {
        return Vec::new();
    }
    (0..=samples - plan.span())
        .step_by(plan.stride)
        .map(|onset| ExamplePair {
            trial,
            matched_onset: onset,
            mismatched_onset: onset + plan.len + plan.gap,
            len: plan.len,
        })
        .collect()
}

/// An example together with its presentation order: `label = 1` puts the
/// matched segment first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabeledExample {
    pub pair: ExamplePair,
    pub label: u8,
}

/// Cuts `examples` (already in epoch order) into batches of `batch_size`
/// and marks a random half of every batch as mismatched-first. A trailing
/// partial batch is dropped so every batch is exactly balanced.
pub fn balanced_batches<R: Rng>(examples: &[ExamplePair], batch_size: usize, rng: &mut R) -> Vec<Vec<LabeledExample>> {
    assert!(
        batch_size >= 2 && batch_size.is_multiple_of(2),
        "batch size must be even"
    );
    examples
        .chunks_exact(batch_size)
        .map(|chunk| {
            let mut labels: Vec<u8> = (0..batch_size).map(|i| u8::from(i < batch_size / 2)).collect();
            labels.shuffle(rng);
            chunk
                .iter()
                .zip(labels)
                .map(|(pair, label)| LabeledExample { pair: *pair, label })
                .collect()
        })
        .collect()
}
