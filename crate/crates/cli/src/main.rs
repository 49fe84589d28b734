fn main() {
    std::process::exit(membrane_lab::dispatch(std::env::args_os()));
}
