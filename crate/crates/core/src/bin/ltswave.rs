fn main() {
    std::process::exit(ltswave::harness::cli_main(std::env::args_os()));
}
