use fif_core::{attractor, continuation, ifs_from_data, DataNode, Error};

fn main() -> Result<(), Error> {
    let nodes = [
        DataNode::new(0.0, 0.0),
        DataNode::new(1.0, 1.0),
        DataNode::new(2.0, 0.0),
    ];
    let ifs = ifs_from_data(&nodes, &[0.25, 0.25])?;

    let y = attractor::evaluate(&ifs, 0.5, 40)?;

    let theta = continuation::Address::parse("(2)", ifs.n_branches())?;
    let left = continuation::continue_eval(&ifs, &theta, -1.0, 32)?;
    println!("f(0.5) = {y}, continued f(-1) = {}", left.value);
    Ok(())
}
