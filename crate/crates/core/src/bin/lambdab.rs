use lambdab::cli::{run, Io};

fn main() {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    let code = run(
        std::env::args_os(),
        &mut Io {
            out: &mut stdout.lock(),
            err: &mut stderr.lock(),
        },
    );
    std::process::exit(code);
}
