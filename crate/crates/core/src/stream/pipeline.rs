use std::sync::mpsc::{sync_channel, IntoIter};
use std::thread::{self, JoinHandle};

use crate::error::Result;
use crate::features::ExtractedRecord;

/// Records produced on a separate thread and handed over through a bounded
/// FIFO buffer. The producer blocks while the buffer is full.
pub struct BoundedRecords {
    rx: IntoIter<Result<ExtractedRecord>>,
    producer: Option<JoinHandle<()>>,
}

/// Moves `source` onto a decoder thread with a buffer of `capacity` records.
pub fn bounded<I>(source: I, capacity: usize) -> BoundedRecords
where
    I: IntoIterator<Item = Result<ExtractedRecord>> + Send + 'static,
    I::IntoIter: Send,
{
    let (tx, rx) = sync_channel(capacity.max(1));
    let producer = thread::spawn(move || {
        for rec in source {
            let stop = rec.is_err();
            if tx.send(rec).is_err() || stop {
                break;
            }
        }
    });
    BoundedRecords { rx: rx.into_iter(), producer: Some(producer) }
}

impl Iterator for BoundedRecords {
    type Item = Result<ExtractedRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let next = self.rx.next();
        if next.is_none() {
            if let Some(h) = self.producer.take() {
                if h.join().is_err() {
                    log::error!("record producer thread panicked");
                }
            }
        }
        next
    }
}
