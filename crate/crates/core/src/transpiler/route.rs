//! Star-to-line routing: the hub qubit (cavity/environment) is shuttled
//! along a linear chain with SWAPs so that it is always adjacent to the
//! emitter it interacts with next.

use crate::circuit::{Circuit, Gate, GateKind, Role};
use crate::error::{Error, Result};

/// Wire shared by every two-qubit gate, preferring the cavity wire when the
/// choice is ambiguous.
fn find_hub(circuit: &Circuit) -> Result<Option<usize>> {
    let mut common: Option<Vec<usize>> = None;
    for g in circuit.gates().iter().filter(|g| g.is_two_qubit()) {
        let q = g.qubits();
        common = Some(match common {
            None => q.to_vec(),
            Some(c) => c.into_iter().filter(|w| q.contains(w)).collect(),
        });
    }
    let Some(common) = common else { return Ok(None) };
    let cav = circuit.final_wire_of(Role::CavityEnv);
    match common.as_slice() {
        [] => Err(Error::Routing("two-qubit gates do not share a hub qubit".into())),
        [w] => Ok(Some(*w)),
        ws => Ok(Some(cav.filter(|c| ws.contains(c)).unwrap_or(ws[0]))),
    }
}

/// Route `circuit` onto the chain `chain` (physical wires in chain order),
/// placing the hub at chain position `hub_position`.
pub fn route_star_to_line(circuit: &Circuit, chain: &[usize], hub_position: usize) -> Result<Circuit> {
    let w = circuit.width();
    let mut sorted = chain.to_vec();
    sorted.sort_unstable();
    if sorted != (0..w).collect::<Vec<_>>() {
        return Err(Error::Routing(format!("chain {chain:?} is not a permutation of 0..{w}")));
    }
    if hub_position >= w {
        return Err(Error::Routing(format!("hub position {hub_position} outside chain of length {w}")));
    }
    let hub = find_hub(circuit)?.unwrap_or_else(|| circuit.final_wire_of(Role::CavityEnv).unwrap_or(0));

    // Partners in order of first interaction, then idle wires.
    let mut order: Vec<usize> = Vec::new();
    for g in circuit.gates().iter().filter(|g| g.is_two_qubit()) {
        for &q in g.qubits() {
            if q != hub && !order.contains(&q) {
                order.push(q);
            }
        }
    }
    let idle: Vec<usize> = (0..w).filter(|q| *q != hub && !order.contains(q)).collect();
    order.extend(idle);

    let mut slots: Vec<usize> = (0..w).filter(|&p| p != hub_position).collect();
    slots.sort_by_key(|&p| (p.abs_diff(hub_position), p > hub_position));
    // pos[input wire] = chain position; at[chain position] = input wire.
    let mut pos = vec![0; w];
    pos[hub] = hub_position;
    for (&q, &p) in order.iter().zip(&slots) {
        pos[q] = p;
    }
    let mut at = vec![0; w];
    for q in 0..w {
        at[pos[q]] = q;
    }

    let mut out = circuit.empty_like();
    for g in circuit.gates() {
        if g.is_two_qubit() {
            let partner = g.qubits().iter().copied().find(|&q| q != hub).unwrap_or(hub);
            while pos[hub].abs_diff(pos[partner]) > 1 {
                let next = if pos[partner] > pos[hub] { pos[hub] + 1 } else { pos[hub] - 1 };
                let other = at[next];
                out.push(Gate::two(GateKind::Swap, chain[pos[hub]], chain[next]))?;
                at[pos[hub]] = other;
                pos[other] = pos[hub];
                at[next] = hub;
                pos[hub] = next;
            }
        }
        let phys: Vec<usize> = (0..w).map(|q| chain[pos[q]]).collect();
        out.push(g.remap(&phys))?;
    }
    let relabeling = circuit.relabeling().iter().map(|&q| chain[pos[q]]).collect();
    out.set_relabeling(relabeling)?;
    Ok(out)
}

/// `true` when every two-qubit gate acts on neighbours of `chain`.
pub fn respects_chain(circuit: &Circuit, chain: &[usize]) -> bool {
    let mut pos = vec![usize::MAX; circuit.width()];
    for (p, &q) in chain.iter().enumerate() {
        if q < pos.len() {
            pos[q] = p;
        }
    }
    circuit.gates().iter().filter(|g| g.is_two_qubit()).all(|g| {
        let [a, b] = g.pair();
        pos[a] != usize::MAX && pos[b] != usize::MAX && pos[a].abs_diff(pos[b]) == 1
    })
}
