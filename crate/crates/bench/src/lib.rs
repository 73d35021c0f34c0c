//! Benchmark fixtures for the criterion suite in `benches/`.

use pebblelog::lab::digraph;
use pebblelog::logic::ladder_of_word;
use pebblelog::structure::word_to_structure;
use pebblelog::{Elem, Structure};

/// The ladder structure of `a^n b^n`.
pub fn ladder_instance(n: usize) -> Structure {
    let w = format!("{}{}", "a".repeat(n), "b".repeat(n));
    ladder_of_word(&word_to_structure(&w).expect("word")).expect("ladder")
}

/// The directed cycle on `n` vertices.
pub fn cycle(n: usize) -> Structure {
    let edges: Vec<(Elem, Elem)> = (0..n as Elem).map(|i| (i, (i + 1) % n as Elem)).collect();
    digraph(n, &edges).expect("cycle")
}

/// The symmetric cycle on `n` vertices.
pub fn undirected_cycle(n: usize) -> Structure {
    let edges: Vec<(Elem, Elem)> = (0..n as Elem)
        .flat_map(|i| {
            let j = (i + 1) % n as Elem;
            [(i, j), (j, i)]
        })
        .collect();
    digraph(n, &edges).expect("cycle")
}
