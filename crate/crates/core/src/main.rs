fn main() {
    std::process::exit(adaptix::harness::cli_main(std::env::args_os()));
}
