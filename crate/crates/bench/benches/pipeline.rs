//! Throughput of the four generation paths and the RNS arithmetic
//! they lean on, all for one degree-16 register.

use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};
use prsg_core::bits::parse_bits;
use prsg_core::{
    basis_table, block_stream, encode_lnp_residues, eval_channels, eval_lnp, extract_block,
    localize_fault, pack_system, CrtPlan, Lfsr, ModuliSet, ProtectedGenerator, PrsBlock,
    TapPolynomial, DEFAULT_EXCLUSION_THRESHOLD,
};

const STREAM_BITS: usize = 4096;

fn poly16() -> TapPolynomial {
    TapPolynomial::new(16, &[2, 3, 5]).unwrap()
}

fn seed16() -> Vec<bool> {
    parse_bits("1001011001101011").unwrap()
}

fn stream_benches(c: &mut Criterion) {
    let poly = poly16();
    let seed = seed16();
    let tau = poly.degree();

    let mut group = c.benchmark_group("stream_deg16");
    group.throughput(Throughput::Elements(STREAM_BITS as u64));

    group.bench_function("serial", |b| {
        b.iter(|| {
            let mut lfsr = Lfsr::new(poly.clone(), &seed).unwrap();
            black_box(lfsr.generate(STREAM_BITS))
        })
    });

    group.bench_function("block", |b| {
        b.iter(|| black_box(block_stream(&poly, &seed, STREAM_BITS).unwrap()))
    });

    group.bench_function("lnp", |b| {
        let lnp = pack_system(&poly.block_matrix(tau).unwrap());
        b.iter(|| {
            let mut block = PrsBlock::from_ascending(&seed, 0);
            let mut out = block.ascending();
            while out.len() < STREAM_BITS {
                let u = eval_lnp(&lnp, &block.ascending()).unwrap();
                block = extract_block(&lnp, &u);
                out.extend(block.ascending());
            }
            out.truncate(STREAM_BITS);
            black_box(out)
        })
    });

    group.bench_function("rns", |b| {
        let lnp = pack_system(&poly.block_matrix(tau).unwrap());
        let moduli = ModuliSet::auto(lnp.total_width(), 2).unwrap();
        b.iter(|| {
            let mut gen =
                ProtectedGenerator::new(&poly, &seed, moduli.clone(), DEFAULT_EXCLUSION_THRESHOLD)
                    .unwrap();
            let mut out = gen.current_block().ascending();
            while out.len() < STREAM_BITS {
                let outcome = gen.next_block().unwrap();
                out.extend(outcome.block.expect("fault-free run").ascending());
            }
            out.truncate(STREAM_BITS);
            black_box(out)
        })
    });

    group.finish();
}

fn arithmetic_benches(c: &mut Criterion) {
    let poly = poly16();
    let seed = seed16();
    let lnp = pack_system(&poly.block_matrix(poly.degree()).unwrap());
    let moduli = ModuliSet::auto(lnp.total_width(), 2).unwrap();
    let rlnp = encode_lnp_residues(&lnp, &moduli);
    let table = basis_table(&moduli);
    let plan = CrtPlan::new(&moduli.all()).unwrap();

    let x = PrsBlock::from_ascending(&seed, 0);
    let ascending = x.ascending();
    let values = eval_channels(&rlnp, &ascending).unwrap();

    let mut group = c.benchmark_group(format!("rns_{}ch", moduli.channel_count()));

    group.bench_function("eval_channels", |b| {
        b.iter(|| black_box(eval_channels(&rlnp, black_box(&ascending)).unwrap()))
    });

    group.bench_function("crt_reconstruct", |b| {
        b.iter(|| black_box(plan.reconstruct(black_box(values.values()))))
    });

    group.bench_function("localize", |b| {
        let mut faulted = values.clone();
        let m = moduli.all()[2];
        faulted.values_mut()[2] = (values.values()[2] + 1) % m;
        b.iter(|| black_box(localize_fault(black_box(&faulted), &moduli, &table).unwrap()))
    });

    group.finish();
}

criterion_group!(benches, stream_benches, arithmetic_benches);
criterion_main!(benches);
