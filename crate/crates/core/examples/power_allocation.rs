//! Minimum total power meeting UE and sensing SDNR targets under ACLR limits.

use ddisac::powalloc::{solve, AllocProblem, Status};

fn main() -> ddisac::Result<()> {
    let problem = AllocProblem {
        ue_gains: vec![2e-7, 5e-8],
        ue_resources: vec![1024, 1024],
        target_gains: vec![3e-10],
        coupling: vec![vec![0.0]],
        m: 256,
        m_com: 128,
        n: 32,
        gamma_ft: 31.6,
        gamma_dd: 20.0,
        aclr_rel: 1.0,
        aclr_abs: 1e-7,
        delta_f: 3.90625e6,
        sigma_z2: 1.6e-13,
        antennas: 64,
        p_max: 20.0,
    };
    let s = solve(&problem)?;
    match s.status {
        Status::Optimal => {
            println!("P_tot {:.4e} W (in-band {:.4e}, out-of-band {:.4e})", s.p_tot, s.p_ib, s.p_ob);
            for (k, x) in s.p_com_k.iter().enumerate() {
                println!("UE {k}: {x:.4e} W per resource");
            }
            println!("sensing: {:.4e} W per subcarrier", s.p_sen);
            let tight: Vec<String> = s.tight_constraints.iter().map(ToString::to_string).collect();
            println!("tight: {}", tight.join(", "));
        }
        Status::Infeasible => {
            let cert: Vec<String> = s.certificate.iter().map(ToString::to_string).collect();
            println!("infeasible; conflicting rows: {}", cert.join(", "));
        }
    }
    Ok(())
}
