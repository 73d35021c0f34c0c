use std::collections::BTreeMap;

use itertools::Itertools;

use super::{Elem, Signature, Structure, Tuple};
use crate::error::{Budget, Error, Result};

/// Default cap on the number of candidate structures an enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: Budget = Budget(1 << 24);

const ISO_SIZE_LIMIT: usize = 8;

/// All structures over a constant-free signature with domains `1..=m` for
/// `m <= max_size`, in increasing size and then increasing fact mask.
///
/// With `up_to_iso`, only the structure whose fact mask is minimal among all
/// relabellings is produced.
pub fn enumerate_structures(
    sig: &Signature,
    max_size: usize,
    up_to_iso: bool,
    budget: Budget,
) -> Result<StructureIter> {
    if !sig.is_constant_free() {
        return Err(Error::InvalidParameters(
            "structure enumeration needs a constant-free signature".into(),
        ));
    }
    if max_size == 0 {
        return Err(Error::InvalidParameters("max_size must be at least 1".into()));
    }
    if up_to_iso && max_size > ISO_SIZE_LIMIT {
        return Err(Error::InvalidParameters(format!(
            "isomorphism reduction supports at most {ISO_SIZE_LIMIT} elements"
        )));
    }
    let mut total: u128 = 0;
    for m in 1..=max_size {
        let bits = slot_count(sig, m);
        if bits > 63 {
            return Err(Error::BudgetExceeded {
                what: "structure enumeration",
                needed: if bits < 127 { 1u128 << bits } else { u128::MAX },
                limit: budget.0,
            });
        }
        total += 1u128 << bits;
    }
    budget.check("structure enumeration", total)?;
    Ok(StructureIter {
        sig: sig.clone(),
        max_size,
        up_to_iso,
        size: 0,
        layout: Layout::default(),
        next_mask: 0,
        end: 0,
    })
}

fn slot_count(sig: &Signature, m: usize) -> u32 {
    sig.relations()
        .map(|(_, a)| (m as u128).pow(a as u32))
        .sum::<u128>()
        .min(u32::MAX as u128) as u32
}

#[derive(Default)]
struct Layout {
    slots: Vec<(usize, Tuple)>,
    // for every non-identity permutation, the image slot of every slot
    perms: Vec<Vec<u8>>,
}

impl Layout {
    fn new(sig: &Signature, m: usize, up_to_iso: bool) -> Self {
        let mut slots = Vec::new();
        let mut index = BTreeMap::new();
        for (ri, (_, arity)) in sig.relations().enumerate() {
            for t in (0..arity).map(|_| 0..m as Elem).multi_cartesian_product() {
                index.insert((ri, t.clone()), slots.len());
                slots.push((ri, t));
            }
        }
        let mut perms = Vec::new();
        if up_to_iso {
            for p in (0..m as Elem).permutations(m).skip(1) {
                let table = slots
                    .iter()
                    .map(|(ri, t)| {
                        let img: Tuple = t.iter().map(|&e| p[e as usize]).collect();
                        index[&(*ri, img)] as u8
                    })
                    .collect();
                perms.push(table);
            }
        }
        Layout { slots, perms }
    }

    fn is_canonical(&self, mask: u64) -> bool {
        self.perms.iter().all(|table| {
            let mut image = 0u64;
            for (i, &j) in table.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    image |= 1 << j;
                }
            }
            image >= mask
        })
    }
}

/// Resumable stream of structures; see [`enumerate_structures`].
pub struct StructureIter {
    sig: Signature,
    max_size: usize,
    up_to_iso: bool,
    size: usize,
    layout: Layout,
    next_mask: u64,
    end: u64,
}

impl StructureIter {
    fn build(&self, mask: u64) -> Structure {
        let mut relations = vec![Default::default(); self.sig.relation_count()];
        for (i, (ri, t)) in self.layout.slots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let set: &mut std::collections::BTreeSet<Tuple> = &mut relations[*ri];
                set.insert(t.clone());
            }
        }
        Structure {
            signature: self.sig.clone(),
            names: (1..=self.size).map(|i| i.to_string()).collect(),
            relations,
            constants: BTreeMap::new(),
        }
    }
}

impl Iterator for StructureIter {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        loop {
            if self.next_mask >= self.end {
                if self.size >= self.max_size {
                    return None;
                }
                self.size += 1;
                self.layout = Layout::new(&self.sig, self.size, self.up_to_iso);
                self.next_mask = 0;
                self.end = 1u64 << self.layout.slots.len();
                continue;
            }
            let mask = self.next_mask;
            self.next_mask += 1;
            if !self.up_to_iso || self.layout.is_canonical(mask) {
                return Some(self.build(mask));
            }
        }
    }
}
