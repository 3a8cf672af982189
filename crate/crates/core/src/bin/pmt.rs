fn main() {
    std::process::exit(pmt::cli::dispatch(std::env::args_os()));
}
