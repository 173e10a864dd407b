fn main() {
    std::process::exit(spectral_lab::cliio::run_command(std::env::args()));
}
