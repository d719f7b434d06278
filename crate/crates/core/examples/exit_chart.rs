//! Structured EXIT curves of the E2RC and IRA parity parts, checked against
//! a few Monte-Carlo points.
use e2rc::exit::{monte_carlo_exit, structured_exit_curve, StructuredComponent};
use e2rc::infotheory::ChannelParam;

fn main() -> e2rc::Result<()> {
    let chan = ChannelParam::new(0.95775)?;
    for (name, comp) in [
        ("e2rc", StructuredComponent::e2rc(128, 8, chan)?),
        ("ira", StructuredComponent::ira_chain(128, 8, chan)?),
    ] {
        let curve = structured_exit_curve(&comp, 2000)?;
        println!("{name}");
        for x in [0.0, 0.25, 0.5, 0.75, 0.95] {
            let mc = monte_carlo_exit(&comp, x, 20_000, 7)?;
            println!("  I_A {x:.2}  fast {:.4}  mc {mc:.4}", curve.eval(x));
        }
    }
    Ok(())
}
