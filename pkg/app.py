from io import BytesIO

import pandas as pd
import streamlit as st

import config
from arc_dissection import dissection_report, major_arc_measure
from local_densities import padic_density_via_counting, padic_density_via_sums, series_term
from moments import BudgetExceeded, ConfigurationError, Offset, congruence_soluble
from singular_integral import NormalizedOffset, singular_integral_truncated
from solution_counter import count_solutions

st.set_page_config(page_title="Vinogradov Toolkit", layout="wide", initial_sidebar_state="expanded")

st.markdown("""
<style>
    #MainMenu {visibility: hidden;}
    footer {visibility: hidden;}
    .stDeployButton {display: none;}
    .stApp {
        max-width: 1200px;
        margin: 0 auto;
    }
</style>
""", unsafe_allow_html=True)


# ======================
# CACHED COMPUTATIONS
# ======================
@st.cache_data
def count_table(s: int, X_values: tuple, offsets: tuple):
    """One row per (X, h)."""
    rows = []
    for X in X_values:
        for h in offsets:
            result = count_solutions(s, X, Offset(*h), cache_dir=config.CACHE_DIR)
            rows.append({
                "s": s, "X": X, "h": str(Offset(*h)), "B_s(X;h)": result.value,
                "ratio B/X^(2s-6)": result.value / X ** (2 * s - 6),
                "congruence soluble": congruence_soluble(Offset(*h)),
            })
    return rows


@st.cache_data
def density_table(s: int, h: tuple, primes: tuple, H: int):
    rows = []
    for p in primes:
        sums = padic_density_via_sums(p, s, Offset(*h), H)
        counting = padic_density_via_counting(p, s, Offset(*h), H)
        rows.append({"p": p, "H": H, "via sums": sums.value, "via counting": counting.value,
                     "difference": abs(sums.value - counting.value)})
    return rows


@st.cache_data
def series_table(s: int, h: tuple, Qmax: int):
    rows, running = [], 0.0
    for q in range(1, Qmax + 1):
        term = series_term(q, s, Offset(*h))
        running += term
        rows.append({"q": q, "term": term, "partial sum": running})
    return rows


@st.cache_data
def dissection_rows(X: int, samples: int, seed: int):
    report = dissection_report(X, samples, seed)
    measure, scale = major_arc_measure(X)
    rows = [{"label": k, "count": v, "share": v / max(samples, 1)} for k, v in report.histogram.items()]
    return rows, report.p_outside_major, measure, scale


@st.cache_data
def integral_rows(s: int, n: tuple, B: float):
    report = singular_integral_truncated(s, NormalizedOffset(*n), B)
    rows = [{"B": b, "J_s(n; B)": v} for b, v in sorted(report.sequence.items())]
    return rows, report.tail_estimate, report.converged


def download_buttons(df: pd.DataFrame, stem: str):
    """CSV and Excel downloads for one result table."""
    buffer = BytesIO()
    with pd.ExcelWriter(buffer, engine="xlsxwriter") as writer:
        df.to_excel(writer, index=False, sheet_name="Results")
    buffer.seek(0)
    col1, col2 = st.columns(2)
    with col1:
        st.download_button(
            label="📥 Download (Excel)",
            data=buffer,
            file_name=f"{stem}.xlsx",
            mime="application/vnd.ms-excel",
            key=f"{stem}-xlsx",
        )
    with col2:
        st.download_button(
            label="📥 Download (CSV)",
            data=df.to_csv(index=False),
            file_name=f"{stem}.csv",
            mime="text/csv",
            key=f"{stem}-csv",
        )


def parse_offset(text: str):
    try:
        return Offset.parse(text).as_tuple()
    except ConfigurationError as e:
        st.error(f"❌ {e}")
        return None


# ======================
# PAGE
# ======================
st.title("🔢 Cubic Vinogradov Toolkit")

mode = st.sidebar.radio(
    "Section",
    ["Exact counts", "Local densities", "Singular integral", "Arc dissection"],
    help="Each section runs one part of the toolkit; results are cached per input.",
)
seed = st.sidebar.number_input("Seed", value=config.DEFAULT_SEED, step=1)

for key in ("counts", "densities", "series", "dissection", "integral"):
    if key not in st.session_state:
        st.session_state[key] = None

if mode == "Exact counts":
    col1, col2, col3 = st.columns(3)
    with col1:
        s = st.number_input("s (pairs)", min_value=1, max_value=8, value=2)
    with col2:
        X_text = st.text_input("X values", "2,3,4")
    with col3:
        h_text = st.text_input("Offsets (h1,h2,h3; separate with ;)", "0,0,0; 1,3,7")

    if st.button("🚀 Count solutions", type="primary", use_container_width=True):
        offsets = [parse_offset(t) for t in h_text.split(";") if t.strip()]
        if None not in offsets:
            try:
                X_values = tuple(int(v) for v in X_text.split(",") if v.strip())
                with st.spinner("Building representation tables..."):
                    st.session_state.counts = count_table(int(s), X_values, tuple(offsets))
                st.success(f"✅ Counted {len(st.session_state.counts)} configurations")
            except (ConfigurationError, BudgetExceeded, ValueError) as e:
                st.error(f"❌ {e}")

    if st.session_state.counts:
        df = pd.DataFrame(st.session_state.counts)
        st.dataframe(df, use_container_width=True)
        download_buttons(df, "vinogradov_counts")

elif mode == "Local densities":
    col1, col2, col3 = st.columns(3)
    with col1:
        s = st.number_input("s", min_value=1, max_value=8, value=6)
    with col2:
        h_text = st.text_input("h", "1,1,1")
    with col3:
        H = st.number_input("Level H", min_value=0, max_value=3, value=2)
    Qmax = st.slider("Series truncation Qmax", min_value=1, max_value=64, value=16)

    if st.button("📐 Compute densities", type="primary", use_container_width=True):
        h = parse_offset(h_text)
        if h is not None:
            try:
                with st.spinner("Evaluating complete sums..."):
                    st.session_state.densities = density_table(int(s), h, (2, 3, 5, 7), int(H))
                    st.session_state.series = series_table(int(s), h, int(Qmax)) if s >= 5 else None
                st.success("✅ Densities computed")
            except (ConfigurationError, BudgetExceeded) as e:
                st.error(f"❌ {e}")

    if st.session_state.densities:
        st.markdown("### p-adic densities")
        df = pd.DataFrame(st.session_state.densities)
        st.dataframe(df, use_container_width=True)
        download_buttons(df, "padic_densities")
    if st.session_state.series:
        st.markdown("### Singular series partial sums")
        df = pd.DataFrame(st.session_state.series)
        st.dataframe(df, use_container_width=True)
        download_buttons(df, "singular_series")

elif mode == "Singular integral":
    col1, col2, col3 = st.columns(3)
    with col1:
        s = st.number_input("s", min_value=4, max_value=8, value=6)
    with col2:
        n_text = st.text_input("n (n1,n2,n3)", "0,0,0")
    with col3:
        B = st.selectbox("B", [4.0, 8.0, 16.0], index=1)

    if st.button("∫ Evaluate", type="primary", use_container_width=True):
        try:
            n = NormalizedOffset.parse(n_text).as_tuple()
            with st.spinner("Tabulating I(beta) on the product grid..."):
                st.session_state.integral = integral_rows(int(s), n, float(B))
        except (ConfigurationError, BudgetExceeded) as e:
            st.error(f"❌ {e}")

    if st.session_state.integral:
        rows, tail, converged = st.session_state.integral
        if not converged:
            st.warning("Quadrature spot check exceeded the tolerance; treat the values as estimates.")
        st.markdown(f"**Tail estimate past B:** {tail:.3e}")
        df = pd.DataFrame(rows)
        st.dataframe(df, use_container_width=True)
        download_buttons(df, "singular_integral")

else:
    col1, col2 = st.columns(2)
    with col1:
        X = st.number_input("X", min_value=2, value=10 ** 6, step=1000)
    with col2:
        samples = st.number_input("Samples", min_value=0, max_value=10 ** 6, value=10 ** 4, step=1000)

    if st.button("🧭 Label samples", type="primary", use_container_width=True):
        with st.spinner("Classifying sample points..."):
            st.session_state.dissection = dissection_rows(int(X), int(samples), int(seed))

    if st.session_state.dissection:
        rows, outside, measure, scale = st.session_state.dissection
        if outside:
            st.error(f"❌ {outside} sampled points lie in P with a minor-arc third coordinate")
        else:
            st.success("✅ Labels form a partition and P sits inside the one-dimensional major arcs")
        st.markdown(f"**Measure of P:** {measure:.3e} (scale L^7 X^-6 = {scale:.3e})")
        df = pd.DataFrame(rows)
        st.dataframe(df, use_container_width=True)
        download_buttons(df, "dissection")

st.markdown("---")
st.caption(f"💡 Toolkit {config.TOOLKIT_VERSION} • exact counts, local densities and circle-method probes")
