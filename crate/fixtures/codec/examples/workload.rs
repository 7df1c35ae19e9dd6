//! Encodes a batch of record ids the way the export job does.

fn main() {
    let mut bytes = 0;
    for i in 0..100i64 {
        bytes += codec::encode((i - 50) * 7919).len();
    }
    println!("encoded 100 ids into {bytes} bytes; encode calls: {}", codec::encode_calls());
}
