// Write an edge list and labels, then drive the command-line front end on
// them, as `slp solve` and `slp certify` would.

use slp::generators::two_cluster_bridge;
use slp::io::{format_edge_list, format_labels};

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join(format!("slp-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (g, s, _) = two_cluster_bridge(3, 0.05);
    let graph = dir.join("graph.tsv");
    let labels = dir.join("labels.tsv");
    std::fs::write(&graph, format_edge_list(&g))?;
    std::fs::write(&labels, format_labels(&s))?;

    let (graph, labels) = (graph.to_str().unwrap(), labels.to_str().unwrap());
    for args in [
        vec![
            "slp", "solve", "--graph", graph, "--labels", labels, "--iters", "5000",
        ],
        vec![
            "slp",
            "solve",
            "--graph",
            graph,
            "--labels",
            labels,
            "--algorithm",
            "lp",
        ],
        vec!["slp", "certify", "--graph", graph],
    ] {
        println!("$ {}", args[1..].join(" "));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = slp::cli::run(args, &mut out, &mut err);
        print!(
            "{}{}",
            String::from_utf8_lossy(&out),
            String::from_utf8_lossy(&err)
        );
        println!("exit {code}");
    }
    std::fs::remove_dir_all(&dir)
}
