#!/usr/bin/env python3
"""Regenerate data/mini-corpus, a small synthetic classical-style corpus.

Each document mixes one main theme with a little of a second theme and a
shared stock of function characters, so a 5-topic model has something to
find. Output is deterministic for a given --seed.
"""

import argparse
import pathlib
import random

FUNCTION = "之 而 也 者 曰 不 其 以 于 为 乃 则 矣 焉 所 有 无 可 与 故".split()

THEMES = {
    "ru": ("仁 义 礼 乐 孝 悌 忠 信 君 臣 父 子 民 学 德 政 诗 书 贤 师 友 圣 修 身 家 国 敬 让".split()
           + "君子 邦君 嗣君 成礼 读礼 孝廉 道义 严君".split()),
    "dao": ("道 德 玄 虚 静 朴 柔 弱 水 谷 天 地 物 生 死 梦 蝶 鹏 鱼 游 化 真 神 气 一 常 名 自".split()
            + "天道 道心 虚明 虚舟 渊玄 玄居 元气 紫气".split()),
    "bing": ("兵 将 军 战 敌 攻 守 城 车 马 卒 旗 鼓 阵 计 胜 败 险 地 粮 火 间 伏 奇 正 谋 势 形".split()
             + "三军 称兵 疑兵 野战 宿将 儒将 搦战 构兵".split()),
    "yi": ("阴 阳 气 血 脉 病 药 寒 热 肝 心 脾 肺 肾 胃 经 络 针 汗 痛 风 湿 燥 虚 实 补 泻 五 行".split()
           + "太阴 亢阳 理气 神气 含气 重阴 寸阴".split()),
    "shi": ("帝 王 臣 郡 县 官 朝 年 月 诏 令 太 守 相 侯 封 爵 赋 税 狱 刑 州 府 使 奏 宫 史 记".split()
            + "朝列 臣服 陪臣 宦官 县官 品官 帝祚 外朝".split()),
}

BOOKS = [
    ("经部/论语", "ru", ["学而第一", "为政第二", "八佾第三", "里仁第四", "公冶长第五", "雍也第六",
                        "述而第七", "泰伯第八", "子罕第九", "乡党第十"], "dao"),
    ("经部/孟子", "ru", ["梁惠王上", "梁惠王下", "公孙丑上", "公孙丑下", "滕文公上"], "shi"),
    ("子部/道家/老子", "dao", ["道经上", "道经下", "德经上", "德经下"], "yi"),
    ("子部/道家/庄子", "dao", ["逍遥游", "齐物论", "养生主", "人间世", "德充符", "大宗师", "应帝王",
                             "秋水"], "ru"),
    ("子部/兵家/孙子", "bing", ["始计", "作战", "谋攻", "军形", "兵势", "虚实", "军争", "九变",
                              "行军", "地形", "九地", "火攻", "用间"], "shi"),
    ("子部/兵家/吴子", "bing", ["图国", "料敌", "治兵", "论将"], "ru"),
    ("子部/医家/黄帝内经", "yi", ["上古天真论", "四气调神大论", "生气通天论", "金匮真言论",
                                 "阴阳应象大论", "灵兰秘典论", "六节藏象论", "五脏生成", "脉要精微论",
                                 "平人气象论", "热论", "咳论"], "dao"),
    ("史部/正史/史记", "shi", ["五帝本纪", "夏本纪", "殷本纪", "周本纪", "秦本纪", "秦始皇本纪",
                              "项羽本纪", "高祖本纪", "吕太后本纪", "孝文本纪", "孝景本纪", "孝武本纪"],
     "bing"),
    ("史部/正史/汉书", "shi", ["高帝纪", "惠帝纪", "高后纪", "文帝纪", "景帝纪"], "ru"),
]


def sentence(rng, main, second, mix):
    n = rng.randint(4, 12)
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.30:
            out.append(rng.choice(FUNCTION))
        elif r < 0.30 + 0.70 * mix:
            out.append(rng.choice(THEMES[second]))
        else:
            out.append(rng.choice(THEMES[main]))
    return "".join(out)


def document(rng, main, second):
    mix = rng.uniform(0.05, 0.3)
    lines = []
    for _ in range(rng.randint(8, 16)):
        parts = [sentence(rng, main, second, mix) for _ in range(rng.randint(2, 4))]
        lines.append("，".join(parts) + "。")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "mini-corpus"))
    ap.add_argument("--seed", type=int, default=1893)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    root = pathlib.Path(args.out)
    count = 0
    for book, main_theme, chapters, second in BOOKS:
        for chapter in chapters:
            path = root / book / f"{chapter}.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(document(rng, main_theme, second), encoding="utf-8")
            count += 1
    print(f"wrote {count} documents under {root}")


if __name__ == "__main__":
    main()
