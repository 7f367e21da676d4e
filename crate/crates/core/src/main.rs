use clap::Parser;

fn main() {
    let cli = dcadl::cli::Cli::parse();
    std::process::exit(dcadl::cli::run(cli));
}
