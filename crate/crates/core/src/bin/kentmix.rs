fn main() {
    std::process::exit(kentmix::cli::cli_main(std::env::args()));
}
