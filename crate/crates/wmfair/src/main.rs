use clap::Parser;

fn main() {
    let cli = wmfair::cli::Cli::parse();
    match wmfair::run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("wmfair: {e}");
            std::process::exit(e.code());
        }
    }
}
