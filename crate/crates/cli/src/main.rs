use clap::Parser;

fn main() {
    let cli = match heavylight_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; here 2 means "fell back"
            std::process::exit(if e.use_stderr() { 4 } else { 0 });
        }
    };
    std::process::exit(heavylight_cli::run(&cli));
}
