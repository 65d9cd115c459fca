//! Random 3-regular antiferromagnets and the text format used to store them.

use annealkz::model::{classical_energy, generate_regular_graph, parse_graph_text, write_graph_text};

fn main() -> annealkz::Result<()> {
    let graph = generate_regular_graph(16, 3, 2024)?;
    println!("N = {}, edges = {}, connected = {}", graph.n(), graph.edges().len(), graph.is_connected());
    assert!(graph.degrees().iter().all(|&d| d == 3));

    let text = write_graph_text(&graph);
    print!("{text}");
    let back = parse_graph_text(&text)?;
    assert_eq!(back.content_hash(), graph.content_hash());

    // every bond is frustrated in the all-up state
    let up = vec![1i8; graph.n()];
    println!("E(all up) = {}", classical_energy(&graph, &up)?);

    for seed in 0..3 {
        let g = generate_regular_graph(64, 3, seed)?;
        println!("seed {seed}: {}", &g.content_hash()[..16]);
    }
    Ok(())
}
