/// Tracks the best validation loss and how long ago it was reached.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopState<P> {
    pub patience: usize,
    pub best_loss: f64,
    pub best_epoch: Option<usize>,
    pub epochs_since: usize,
    pub best: Option<P>,
}

impl<P: Clone> EarlyStopState<P> {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: None,
            epochs_since: 0,
            best: None,
        }
    }

    /// Records the loss of `epoch`; returns `true` when training should stop.
    /// Training stops once `patience` consecutive epochs fail to improve on
    /// the best loss.
    pub fn update(&mut self, epoch: usize, loss: f64, params: &P) -> bool {
        if loss < self.best_loss {
            self.best_loss = loss;
            self.best_epoch = Some(epoch);
            self.epochs_since = 0;
            self.best = Some(params.clone());
        } else {
            self.epochs_since += 1;
        }
        self.epochs_since >= self.patience
    }
}
