//! Preferred minimal subsets under a monotone predicate (QuickXplain).

use alloc::vec::Vec;

/// Returns a ⊆-minimal subset of `items` satisfying `holds`, or `None` when
/// `items` itself does not. `holds` must be monotone: supersets of a
/// satisfying set satisfy it too.
///
/// Earlier items are preferred: the result minimizes its last position in
/// `items`, then the one before, and so on.
pub fn quick_xplain<T: Clone>(items: &[T], mut holds: impl FnMut(&[T]) -> bool) -> Option<Vec<T>> {
    if !holds(items) {
        return None;
    }
    if items.is_empty() || holds(&[]) {
        return Some(Vec::new());
    }
    let mut background = Vec::new();
    Some(split(&mut background, false, items, &mut holds))
}

fn split<T: Clone>(background: &mut Vec<T>, check: bool, items: &[T], holds: &mut impl FnMut(&[T]) -> bool) -> Vec<T> {
    if check && holds(background) {
        return Vec::new();
    }
    if items.len() == 1 {
        return items.to_vec();
    }
    let (first, second) = items.split_at(items.len() / 2);
    let mark = background.len();

    background.extend_from_slice(first);
    let tail = split(background, !first.is_empty(), second, holds);
    background.truncate(mark);

    background.extend_from_slice(&tail);
    let mut head = split(background, !tail.is_empty(), first, holds);
    background.truncate(mark);

    head.extend(tail);
    head
}
