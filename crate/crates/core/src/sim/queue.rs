use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::Time;

/// Pending events in `(at, seq)` order; `seq` is assigned at push time so
/// simultaneous events pop in the order they were scheduled.
///
/// The heap holds only the packed key and a slot index; payloads live in a
/// slab so sifting moves 24 bytes regardless of payload size.
pub struct EventQueue<P> {
    heap: BinaryHeap<Reverse<(u128, u32)>>,
    slots: Vec<Option<P>>,
    free: Vec<u32>,
    next_seq: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            slots: Vec::new(),
            free: Vec::new(),
            next_seq: 0,
        }
    }
}

fn key_time(key: u128) -> Time {
    Time::from_nanos((key >> 64) as u64)
}

impl<P> EventQueue<P> {
    pub fn push(&mut self, at: Time, payload: P) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = Some(payload);
                s
            }
            None => {
                self.slots.push(Some(payload));
                (self.slots.len() - 1) as u32
            }
        };
        let key = (at.as_nanos() as u128) << 64 | seq as u128;
        self.heap.push(Reverse((key, slot)));
        seq
    }

    pub fn peek_time(&self) -> Option<Time> {
        self.heap.peek().map(|Reverse((k, _))| key_time(*k))
    }

    pub fn pop(&mut self) -> Option<(Time, P)> {
        let Reverse((key, slot)) = self.heap.pop()?;
        let payload = self.slots[slot as usize].take().expect("queued slot");
        self.free.push(slot);
        Some((key_time(key), payload))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
